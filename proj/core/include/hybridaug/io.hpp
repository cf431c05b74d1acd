#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hybridaug/hybrid.hpp"
#include "hybridaug/image.hpp"
#include "hybridaug/metrics.hpp"

namespace hybridaug::io {

/// Raw tensor file: "HAT1", then H, W, C as u32 little-endian, then
/// H*W*C little-endian float32 in (y, x, c) order. Exactly 16 + 4*H*W*C bytes.
inline constexpr char kRawMagic[4] = {'H', 'A', 'T', '1'};

std::vector<std::uint8_t> encode_raw(const ImageTensor& x);
ImageTensor decode_raw(const std::vector<std::uint8_t>& bytes);

/// Loads .png (8-bit gray or RGB, mapped by v/255) or .hat (verbatim).
/// Throws IoError on unreadable or corrupt files and UnsupportedFormat for
/// other extensions, 16-bit PNGs or alpha channels.
ImageTensor load_image(const std::filesystem::path& path);

/// Writes .png (clamp(x + offset) to [0,1], round(v*255)) or .hat (exact
/// floats, offset ignored). The file is written to a temporary sibling and
/// renamed into place.
void save_image(const ImageTensor& x, const std::filesystem::path& path, double offset = 0.0);

/// Writes bytes atomically (temp file + rename). Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// CSV with header "corruption,severity,error". Throws FormatError on any
/// malformed line or duplicate key.
CorruptionErrorTable load_error_table(const std::filesystem::path& path);
CorruptionErrorTable parse_error_table(const std::string& text);
std::string format_error_table(const CorruptionErrorTable& table);

struct PredictionRecord {
  std::string image_id;
  std::int64_t true_label = 0;
  std::int64_t pred_label = 0;
};

/// CSV with header "image_id,true_label,pred_label".
std::vector<PredictionRecord> parse_predictions(const std::string& text);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
std::string format_predictions(const std::vector<PredictionRecord>& records);

/// CSV with header "image_id,label". Duplicate ids are a FormatError.
std::map<std::string, std::int64_t> parse_labels(const std::string& text);
std::map<std::string, std::int64_t> load_labels(const std::filesystem::path& path);
std::string format_labels(const std::vector<std::pair<std::string, std::int64_t>>& labels);

/// One score per line; an optional non-numeric first line is treated as a header.
std::vector<double> parse_scores(const std::string& text);
std::vector<double> load_scores(const std::filesystem::path& path);

/// Flat JSON object whose keys are AugmentConfig field names. Unknown keys
/// are a FormatError; missing keys keep their defaults.
AugmentConfig parse_config(const std::string& json_text);
AugmentConfig load_config(const std::filesystem::path& path);
std::string format_config(const AugmentConfig& cfg);

}  // namespace hybridaug::io
