#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hice/core_model.hpp"

namespace hice {

inline constexpr int kBundleFormatVersion = 1;

/// How embedding values are written: JSON number arrays, or {"b64": ...}
/// holding little-endian float32 values.
enum class EmbeddingEncoding { decimal, packed };

std::string_view to_string(EmbeddingEncoding encoding) noexcept;
std::optional<EmbeddingEncoding> parse_encoding(std::string_view name) noexcept;

std::string encode_base64(std::span<const std::uint8_t> bytes);
/// Standard alphabet with '=' padding. Throws SchemaError on malformed input.
std::vector<std::uint8_t> decode_base64(std::string_view text);

/// Decodes bundle JSON and applies the loader fallbacks, but does not run
/// validate_bundle. `source` is used to prefix diagnostics.
/// Throws ParseError or SchemaError.
EvalBundle parse_bundle_text(std::string_view text, std::string_view source);
EvalBundle parse_bundle(const std::filesystem::path& path);

/// parse_bundle followed by validate_bundle; any error-severity issue aborts
/// the load with a ValidationError naming the file and field.
EvalBundle read_bundle(const std::filesystem::path& path);

/// Canonical serialisation: fixed key order, input array order, 2-space indent.
std::string serialize_bundle(const EvalBundle& bundle, EmbeddingEncoding encoding);

/// Validates, serialises, and replaces `path` atomically (temp file + rename).
void write_bundle(const EvalBundle& bundle, const std::filesystem::path& path,
                  EmbeddingEncoding encoding);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace hice
