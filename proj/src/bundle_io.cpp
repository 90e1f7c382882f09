#include "hice/bundle_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hice/errors.hpp"

namespace hice {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kBase64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

// Walks one JSON object, checking required/optional keys and rejecting any
// key it was not told about.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string pointer, std::string_view source)
      : value_(value), pointer_(std::move(pointer)), source_(source) {
    if (!value_.is_object()) fail(pointer_, "expected an object");
  }

  const json& required(const std::string& key) {
    known_.insert(key);
    const auto it = value_.find(key);
    if (it == value_.end()) fail(child(key), "missing required field \"" + key + "\"");
    return *it;
  }

  const json* optional(const std::string& key) {
    known_.insert(key);
    const auto it = value_.find(key);
    return it == value_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, unused] : value_.items()) {
      if (!known_.contains(key)) fail(child(key), "unexpected field \"" + key + "\"");
    }
  }

  std::string child(const std::string& key) const { return pointer_ + "/" + key; }

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw SchemaError(std::string(source_) + ": " + (where.empty() ? "/" : where) + ": " + what);
  }

 private:
  const json& value_;
  std::string pointer_;
  std::string_view source_;
  std::set<std::string> known_;
};

[[noreturn]] void schema_fail(std::string_view source, const std::string& where,
                              const std::string& what) {
  throw SchemaError(std::string(source) + ": " + where + ": " + what);
}

std::string as_string(const json& v, std::string_view source, const std::string& where) {
  if (!v.is_string()) schema_fail(source, where, "expected a string");
  return v.get<std::string>();
}

double as_number(const json& v, std::string_view source, const std::string& where) {
  if (!v.is_number()) schema_fail(source, where, "expected a number");
  return v.get<double>();
}

Embedding decode_embedding(const json& v, std::string_view source, const std::string& where) {
  if (v.is_array()) {
    std::vector<double> values;
    values.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      values.push_back(as_number(v[i], source, where + "/" + std::to_string(i)));
    }
    return Embedding(std::move(values));
  }
  if (v.is_object()) {
    ObjectReader obj(v, where, source);
    const std::string payload = as_string(obj.required("b64"), source, obj.child("b64"));
    obj.finish();
    std::vector<std::uint8_t> bytes;
    try {
      bytes = decode_base64(payload);
    } catch (const SchemaError& e) {
      schema_fail(source, where + "/b64", e.what());
    }
    if (bytes.size() % 4 != 0) {
      schema_fail(source, where + "/b64", "payload length is not a multiple of 4 bytes");
    }
    std::vector<double> values(bytes.size() / 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::uint32_t bits = std::uint32_t{bytes[4 * i]} | (std::uint32_t{bytes[4 * i + 1]} << 8) |
                                 (std::uint32_t{bytes[4 * i + 2]} << 16) |
                                 (std::uint32_t{bytes[4 * i + 3]} << 24);
      values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return Embedding(std::move(values));
  }
  schema_fail(source, where, "expected a number array or a {\"b64\": ...} object");
}

TextSide decode_text_side(const json& v, std::string_view source, const std::string& where) {
  ObjectReader obj(v, where, source);
  TextSide side;
  side.text = as_string(obj.required("text"), source, obj.child("text"));
  side.global = decode_embedding(obj.required("global"), source, obj.child("global"));
  const json& phrases = obj.required("phrases");
  if (!phrases.is_array()) schema_fail(source, obj.child("phrases"), "expected an array");
  for (std::size_t j = 0; j < phrases.size(); ++j) {
    const std::string pw = obj.child("phrases") + "/" + std::to_string(j);
    ObjectReader po(phrases[j], pw, source);
    PhraseEntry phrase;
    const json& triplet = po.required("triplet");
    if (!triplet.is_array() || triplet.size() != 3) {
      schema_fail(source, po.child("triplet"), "expected [subject, predicate, object]");
    }
    phrase.triplet.subject = as_string(triplet[0], source, po.child("triplet") + "/0");
    phrase.triplet.predicate = as_string(triplet[1], source, po.child("triplet") + "/1");
    phrase.triplet.object = as_string(triplet[2], source, po.child("triplet") + "/2");
    phrase.text = as_string(po.required("text"), source, po.child("text"));
    phrase.embedding = decode_embedding(po.required("embedding"), source, po.child("embedding"));
    po.finish();
    side.phrases.push_back(std::move(phrase));
  }
  obj.finish();
  return side;
}

RegionEntry decode_region(const json& v, std::string_view source, const std::string& where) {
  ObjectReader obj(v, where, source);
  RegionEntry region;
  region.region_id = as_string(obj.required("region_id"), source, obj.child("region_id"));
  if (const json* area = obj.optional("area_frac")) {
    region.area_frac = as_number(*area, source, obj.child("area_frac"));
  }
  if (const json* bbox = obj.optional("bbox")) {
    if (!bbox->is_array() || bbox->size() != 4) {
      schema_fail(source, obj.child("bbox"), "expected [x, y, w, h]");
    }
    const std::string bw = obj.child("bbox");
    region.bbox = BoundingBox{as_number((*bbox)[0], source, bw + "/0"), as_number((*bbox)[1], source, bw + "/1"),
                              as_number((*bbox)[2], source, bw + "/2"), as_number((*bbox)[3], source, bw + "/3")};
  }
  region.embedding = decode_embedding(obj.required("embedding"), source, obj.child("embedding"));
  obj.finish();
  return region;
}

ordered_json encode_embedding(const Embedding& e, EmbeddingEncoding encoding) {
  if (encoding == EmbeddingEncoding::decimal) {
    ordered_json arr = ordered_json::array();
    for (double v : e.values()) arr.push_back(v);
    return arr;
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(e.dim() * 4);
  for (double v : e.values()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int shift = 0; shift < 32; shift += 8) bytes.push_back(static_cast<std::uint8_t>(bits >> shift));
  }
  ordered_json obj = ordered_json::object();
  obj["b64"] = encode_base64(bytes);
  return obj;
}

ordered_json encode_text_side(const TextSide& side, EmbeddingEncoding encoding) {
  ordered_json out = ordered_json::object();
  out["text"] = side.text;
  out["global"] = encode_embedding(side.global, encoding);
  ordered_json phrases = ordered_json::array();
  for (const auto& p : side.phrases) {
    ordered_json po = ordered_json::object();
    po["triplet"] = ordered_json::array({p.triplet.subject, p.triplet.predicate, p.triplet.object});
    po["text"] = p.text;
    po["embedding"] = encode_embedding(p.embedding, encoding);
    phrases.push_back(std::move(po));
  }
  out["phrases"] = std::move(phrases);
  return out;
}

}  // namespace

std::string_view to_string(EmbeddingEncoding encoding) noexcept {
  return encoding == EmbeddingEncoding::decimal ? "decimal" : "packed";
}

std::optional<EmbeddingEncoding> parse_encoding(std::string_view name) noexcept {
  if (name == "decimal") return EmbeddingEncoding::decimal;
  if (name == "packed") return EmbeddingEncoding::packed;
  return std::nullopt;
}

std::string encode_base64(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t n = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out.push_back(kBase64Alphabet[(n >> 18) & 63]);
    out.push_back(kBase64Alphabet[(n >> 12) & 63]);
    out.push_back(kBase64Alphabet[(n >> 6) & 63]);
    out.push_back(kBase64Alphabet[n & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t n = std::uint32_t{bytes[i]} << 16;
    if (rest == 2) n |= std::uint32_t{bytes[i + 1]} << 8;
    out.push_back(kBase64Alphabet[(n >> 18) & 63]);
    out.push_back(kBase64Alphabet[(n >> 12) & 63]);
    out.push_back(rest == 2 ? kBase64Alphabet[(n >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> decode_base64(std::string_view text) {
  if (text.size() % 4 != 0) throw SchemaError("base64 length is not a multiple of 4");
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (std::size_t k = 0; k < kBase64Alphabet.size(); ++k) {
    lookup[static_cast<unsigned char>(kBase64Alphabet[k])] = static_cast<int>(k);
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t n = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int v = 0;
      if (c == '=' && last && k >= 2) {
        ++pad;
      } else {
        if (pad > 0) throw SchemaError("base64 data after padding");
        v = lookup[static_cast<unsigned char>(c)];
        if (v < 0) throw SchemaError("invalid base64 character");
      }
      n = (n << 6) | static_cast<std::uint32_t>(v);
    }
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
  }
  return out;
}

EvalBundle parse_bundle_text(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":byte " << e.byte << ": malformed JSON: " << e.what();
    throw ParseError(msg.str());
  }

  ObjectReader root(doc, "", source);
  const json& version = root.required("version");
  if (!version.is_number_integer() || version.get<long long>() != kBundleFormatVersion) {
    root.fail("/version", "unsupported \"version\" (expected 1)");
  }

  EvalBundle bundle;
  bundle.bundle_id = as_string(root.required("bundle_id"), source, "/bundle_id");
  bundle.image_id = as_string(root.required("image_id"), source, "/image_id");
  const json& dim = root.required("dim");
  if (!dim.is_number_unsigned()) root.fail("/dim", "\"dim\" must be a non-negative integer");
  bundle.dim = dim.get<std::size_t>();

  ObjectReader image(root.required("image"), "/image", source);
  bundle.image_global = decode_embedding(image.required("global"), source, "/image/global");
  const json& regions = image.required("regions");
  if (!regions.is_array()) image.fail("/image/regions", "expected an array");
  for (std::size_t k = 0; k < regions.size(); ++k) {
    bundle.regions.push_back(decode_region(regions[k], source, "/image/regions/" + std::to_string(k)));
  }
  image.finish();

  bundle.candidate = decode_text_side(root.required("candidate"), source, "/candidate");
  if (const json* refs = root.optional("references")) {
    if (!refs->is_array()) root.fail("/references", "expected an array");
    for (std::size_t h = 0; h < refs->size(); ++h) {
      bundle.references.push_back(decode_text_side((*refs)[h], source, "/references/" + std::to_string(h)));
    }
  }
  root.finish();

  apply_loader_fallbacks(bundle);
  return bundle;
}

EvalBundle parse_bundle(const std::filesystem::path& path) {
  return parse_bundle_text(read_text_file(path), path.string());
}

EvalBundle read_bundle(const std::filesystem::path& path) {
  EvalBundle bundle = parse_bundle(path);
  const auto issues = validate_bundle(bundle);
  for (const auto& issue : issues) {
    if (issue.severity == Severity::error) {
      throw ValidationError(path.string() + ": " + issue.field + ": " + issue.message);
    }
  }
  return bundle;
}

std::string serialize_bundle(const EvalBundle& bundle, EmbeddingEncoding encoding) {
  ordered_json doc = ordered_json::object();
  doc["version"] = kBundleFormatVersion;
  doc["bundle_id"] = bundle.bundle_id;
  doc["image_id"] = bundle.image_id;
  doc["dim"] = bundle.dim;

  ordered_json image = ordered_json::object();
  image["global"] = encode_embedding(bundle.image_global, encoding);
  ordered_json regions = ordered_json::array();
  for (const auto& r : bundle.regions) {
    ordered_json ro = ordered_json::object();
    ro["region_id"] = r.region_id;
    if (r.area_frac) ro["area_frac"] = *r.area_frac;
    if (r.bbox) ro["bbox"] = ordered_json::array({r.bbox->x, r.bbox->y, r.bbox->w, r.bbox->h});
    ro["embedding"] = encode_embedding(r.embedding, encoding);
    regions.push_back(std::move(ro));
  }
  image["regions"] = std::move(regions);
  doc["image"] = std::move(image);

  doc["candidate"] = encode_text_side(bundle.candidate, encoding);
  if (!bundle.references.empty()) {
    ordered_json refs = ordered_json::array();
    for (const auto& ref : bundle.references) refs.push_back(encode_text_side(ref, encoding));
    doc["references"] = std::move(refs);
  }
  return doc.dump(2) + "\n";
}

void write_bundle(const EvalBundle& bundle, const std::filesystem::path& path,
                  EmbeddingEncoding encoding) {
  const auto issues = validate_bundle(bundle);
  for (const auto& issue : issues) {
    if (issue.severity == Severity::error) {
      throw ValidationError(path.string() + ": refusing to write invalid bundle: " + issue.field +
                            ": " + issue.message);
    }
  }
  write_text_file_atomically(path, serialize_bundle(bundle, encoding));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open file for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(path.string() + ": read failed");
  return buffer.str();
}

void write_text_file_atomically(const std::filesystem::path& path, std::string_view contents) {
  std::random_device entropy;
  auto tmp = path;
  tmp += ".tmp." + std::to_string(entropy());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot open file for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError(tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError(path.string() + ": cannot replace file: " + ec.message());
  }
}

}  // namespace hice
