#include "hybridaug/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string_view>

#include "hybridaug/errors.hpp"

namespace hybridaug::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Files

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("error writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " into place");
  }
}

// ---------------------------------------------------------------------------
// Raw tensors

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string lowercase_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

std::vector<std::uint8_t> encode_raw(const ImageTensor& x) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * x.size());
  out.insert(out.end(), std::begin(kRawMagic), std::end(kRawMagic));
  put_u32(out, static_cast<std::uint32_t>(x.height()));
  put_u32(out, static_cast<std::uint32_t>(x.width()));
  put_u32(out, static_cast<std::uint32_t>(x.channels()));
  for (float v : x.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

ImageTensor decode_raw(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kRawMagic, 4) != 0) {
    throw IoError("not a raw tensor file (bad magic)");
  }
  const Shape shape{get_u32(bytes.data() + 4), get_u32(bytes.data() + 8),
                    get_u32(bytes.data() + 12)};
  if (shape.channels != 1 && shape.channels != 3) {
    throw UnsupportedFormat("raw tensor has " + std::to_string(shape.channels) + " channels");
  }
  if (shape.height == 0 || shape.width == 0 || bytes.size() != 16 + 4 * shape.size()) {
    throw IoError("raw tensor length does not match its header");
  }
  std::vector<float> data(shape.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes.data() + 16 + 4 * i));
  }
  return ImageTensor(shape, std::move(data));
}

// ---------------------------------------------------------------------------
// PNG

namespace {

ImageTensor decode_png(const std::string& bytes, const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError("cannot decode " + path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw UnsupportedFormat(path.string() + ": only 8-bit PNG channels are supported");
  }
  if (image.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&image);
    throw UnsupportedFormat(path.string() + ": PNG alpha channels are not supported");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const Shape shape{image.height, image.width, color ? 3u : 1u};
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw IoError("cannot decode " + path.string() + ": " + image.message);
  }
  std::vector<float> data(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    data[i] = static_cast<float>(pixels[i] / 255.0);
  }
  return ImageTensor(shape, std::move(data));
}

std::string encode_png(const ImageTensor& x, double offset) {
  std::vector<std::uint8_t> pixels(x.size());
  auto src = x.data();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(static_cast<double>(src[i]) + offset, 0.0, 1.0);
    pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(x.width());
  image.height = static_cast<png_uint_32>(x.height());
  image.format = x.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

ImageTensor load_image(const fs::path& path) {
  const std::string ext = lowercase_extension(path);
  if (ext != ".png" && ext != ".hat") {
    throw UnsupportedFormat(path.string() + ": expected a .png or .hat file");
  }
  const std::string bytes = read_file(path);
  if (ext == ".hat") {
    try {
      return decode_raw(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
    } catch (const IoError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  return decode_png(bytes, path);
}

void save_image(const ImageTensor& x, const fs::path& path, double offset) {
  const std::string ext = lowercase_extension(path);
  if (ext == ".hat") {
    const auto raw = encode_raw(x);
    write_file_atomic(path, std::string(raw.begin(), raw.end()));
  } else if (ext == ".png") {
    write_file_atomic(path, encode_png(x, offset));
  } else {
    throw UnsupportedFormat(path.string() + ": expected a .png or .hat file");
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no + 1) + ": "; }

template <typename T>
T parse_number(std::string_view s, std::size_t line_no, const char* what) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw FormatError(where(line_no) + "bad " + what + " '" + std::string(s) + "'");
  }
  return value;
}

// Returns the data rows after checking the header; every row must have
// exactly `columns` fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, std::string_view header,
                                                std::size_t columns) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != header) {
    throw FormatError("expected CSV header '" + std::string(header) + "'");
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split_fields(lines[i]);
    if (fields.size() != columns) {
      throw FormatError(where(i) + "expected " + std::to_string(columns) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

CorruptionErrorTable parse_error_table(const std::string& text) {
  CorruptionErrorTable table;
  const auto rows = parse_csv(text, "corruption,severity,error", 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row[0].empty()) throw FormatError(where(i + 1) + "empty corruption name");
    const int severity = parse_number<int>(row[1], i + 1, "severity");
    const double error = parse_number<double>(row[2], i + 1, "error");
    try {
      table.set(row[0], severity, error);
    } catch (const InvalidArgument& e) {
      throw FormatError(where(i + 1) + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where(i + 1) + e.what());
    }
  }
  return table;
}

CorruptionErrorTable load_error_table(const fs::path& path) {
  return parse_error_table(read_file(path));
}

std::string format_error_table(const CorruptionErrorTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "corruption,severity,error\n";
  for (const auto& [key, error] : table.entries()) {
    out << key.first << ',' << key.second << ',' << error << '\n';
  }
  return out.str();
}

std::vector<PredictionRecord> parse_predictions(const std::string& text) {
  std::vector<PredictionRecord> records;
  const auto rows = parse_csv(text, "image_id,true_label,pred_label", 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row[0].empty()) throw FormatError(where(i + 1) + "empty image_id");
    records.push_back({row[0], parse_number<std::int64_t>(row[1], i + 1, "true_label"),
                       parse_number<std::int64_t>(row[2], i + 1, "pred_label")});
  }
  return records;
}

std::vector<PredictionRecord> load_predictions(const fs::path& path) {
  return parse_predictions(read_file(path));
}

std::string format_predictions(const std::vector<PredictionRecord>& records) {
  std::string out = "image_id,true_label,pred_label\n";
  for (const auto& r : records) {
    out += r.image_id + ',' + std::to_string(r.true_label) + ',' + std::to_string(r.pred_label) + '\n';
  }
  return out;
}

std::map<std::string, std::int64_t> parse_labels(const std::string& text) {
  std::map<std::string, std::int64_t> labels;
  const auto rows = parse_csv(text, "image_id,label", 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row[0].empty()) throw FormatError(where(i + 1) + "empty image_id");
    const auto label = parse_number<std::int64_t>(row[1], i + 1, "label");
    if (!labels.emplace(row[0], label).second) {
      throw FormatError(where(i + 1) + "duplicate image_id '" + row[0] + "'");
    }
  }
  return labels;
}

std::map<std::string, std::int64_t> load_labels(const fs::path& path) {
  return parse_labels(read_file(path));
}

std::string format_labels(const std::vector<std::pair<std::string, std::int64_t>>& labels) {
  std::string out = "image_id,label\n";
  for (const auto& [id, label] : labels) out += id + ',' + std::to_string(label) + '\n';
  return out;
}

std::vector<double> parse_scores(const std::string& text) {
  const auto lines = split_lines(text);
  std::vector<double> scores;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    const bool numeric = !line.empty() && ec == std::errc() && ptr == line.data() + line.size();
    if (!numeric) {
      if (i == 0 && !line.empty()) continue;  // header
      throw FormatError(where(i) + "bad score '" + line + "'");
    }
    if (!std::isfinite(value)) throw FormatError(where(i) + "non-finite score");
    scores.push_back(value);
  }
  return scores;
}

std::vector<double> load_scores(const fs::path& path) { return parse_scores(read_file(path)); }

// ---------------------------------------------------------------------------
// Config

AugmentConfig parse_config(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("config must be a JSON object");
  AugmentConfig cfg;
  static const std::set<std::string> known = {"kernel_size", "sigma",       "p_paired",
                                              "p_single",    "p_inner_apr", "seed"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw FormatError("unknown config key '" + key + "'");
    if (!value.is_number()) throw FormatError("config key '" + key + "' must be a number");
  }
  try {
    if (doc.contains("kernel_size")) {
      if (!doc["kernel_size"].is_number_unsigned()) {
        throw FormatError("config key 'kernel_size' must be a positive integer");
      }
      cfg.kernel_size = doc["kernel_size"].get<std::size_t>();
    }
    if (doc.contains("sigma")) cfg.sigma = doc["sigma"].get<double>();
    if (doc.contains("p_paired")) cfg.p_paired = doc["p_paired"].get<double>();
    if (doc.contains("p_single")) cfg.p_single = doc["p_single"].get<double>();
    if (doc.contains("p_inner_apr")) cfg.p_inner_apr = doc["p_inner_apr"].get<double>();
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned()) {
        throw FormatError("config key 'seed' must be a nonnegative integer");
      }
      cfg.seed = doc["seed"].get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad config value: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

AugmentConfig load_config(const fs::path& path) { return parse_config(read_file(path)); }

std::string format_config(const AugmentConfig& cfg) {
  nlohmann::json doc = {
      {"kernel_size", cfg.kernel_size}, {"sigma", cfg.sigma},
      {"p_paired", cfg.p_paired},       {"p_single", cfg.p_single},
      {"p_inner_apr", cfg.p_inner_apr}, {"seed", cfg.seed},
  };
  return doc.dump(2) + "\n";
}

}  // namespace hybridaug::io
