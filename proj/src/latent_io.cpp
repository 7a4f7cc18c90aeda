#include "latent_morph/latent_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "latent_morph/file_io.hpp"

namespace latent_morph {

using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "npy I/O assumes a little-endian host");

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += fmt::format(".tmp{}", std::hash<std::string>{}(path.string()) & 0xffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(fmt::format("short write to {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

namespace {

json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", what, e.what()));
  }
}

template <typename T>
T required(const json& doc, const char* key, std::string_view what) {
  if (!doc.contains(key)) throw ParseError(fmt::format("{}: missing \"{}\"", what, key));
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(fmt::format("{}: \"{}\" has the wrong type", what, key));
  }
}

LatentMatrix<double> parse_data(const json& doc, Eigen::Index layers, Eigen::Index dim,
                                std::string_view what) {
  if (!doc.contains("data") || !doc["data"].is_array()) {
    throw ParseError(fmt::format("{}: missing \"data\" array", what));
  }
  const json& data = doc["data"];
  if (static_cast<Eigen::Index>(data.size()) != layers) {
    throw ShapeError(fmt::format("{}: declared {} layers but data has {} rows", what, layers,
                                 data.size()));
  }
  LatentMatrix<double> values(layers, dim);
  for (Eigen::Index r = 0; r < layers; ++r) {
    const json& row = data[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw ShapeError(fmt::format("{}: row {} does not have {} values", what, r, dim));
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ParseError(fmt::format("{}: non-numeric value in row {}", what, r));
      values(r, c) = v.get<double>();
    }
  }
  detail::require_finite(values, what);
  return values;
}

struct Header {
  LatentSpace space;
  Eigen::Index layers;
  Eigen::Index dim;
};

Header parse_header(const json& doc, std::string_view what) {
  if (!doc.is_object()) throw ParseError(fmt::format("{}: expected a JSON object", what));
  Header h{parse_space(required<std::string>(doc, "space", what)),
           required<Eigen::Index>(doc, "layers", what), required<Eigen::Index>(doc, "dim", what)};
  if (h.layers != layers_for(h.space)) {
    throw ShapeError(fmt::format("{}: space {} requires {} layers, declared {}", what,
                                 space_name(h.space), layers_for(h.space), h.layers));
  }
  if (h.dim <= 0) throw ShapeError(fmt::format("{}: dim must be positive", what));
  return h;
}

ordered_json header_json(LatentSpace space, const LatentMatrix<double>& values) {
  ordered_json doc;
  doc["space"] = space_name(space);
  doc["layers"] = values.rows();
  doc["dim"] = values.cols();
  return doc;
}

ordered_json data_json(const LatentMatrix<double>& values) {
  ordered_json data = ordered_json::array();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < values.cols(); ++c) row.push_back(values(r, c));
    data.push_back(std::move(row));
  }
  return data;
}

}  // namespace

LatentCode parse_latent(const std::string& json_text) {
  constexpr std::string_view what = "latent file";
  json doc = parse_json(json_text, what);
  Header h = parse_header(doc, what);
  std::optional<std::string> image_id;
  if (doc.contains("image_id") && !doc["image_id"].is_null()) {
    image_id = required<std::string>(doc, "image_id", what);
  }
  return LatentCode(h.space, parse_data(doc, h.layers, h.dim, what), std::move(image_id));
}

LatentCode read_latent(const std::filesystem::path& path) {
  try {
    return parse_latent(read_file(path));
  } catch (const Error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string write_latent(const LatentCode& code) {
  ordered_json doc = header_json(code.space(), code.values());
  if (code.image_id()) doc["image_id"] = *code.image_id();
  doc["data"] = data_json(code.values());
  return doc.dump() + "\n";
}

void save_latent(const std::filesystem::path& path, const LatentCode& code) {
  write_file_atomic(path, write_latent(code));
}

Direction parse_direction(const std::string& json_text) {
  constexpr std::string_view what = "direction file";
  json doc = parse_json(json_text, what);
  Header h = parse_header(doc, what);
  auto name = required<std::string>(doc, "name", what);

  Provenance provenance = ImportProvenance{""};
  if (doc.contains("provenance") && doc["provenance"].is_object()) {
    const json& p = doc["provenance"];
    if (p.contains("imported")) {
      provenance = ImportProvenance{required<std::string>(p, "imported", what)};
    } else {
      provenance = PairProvenance{required<std::string>(p, "source_a", what),
                                  required<std::string>(p, "source_b", what)};
    }
  } else if (doc.contains("provenance") && !doc["provenance"].is_null()) {
    throw ParseError("direction file: \"provenance\" must be an object");
  }

  std::optional<std::vector<int>> active;
  if (doc.contains("active_layers") && !doc["active_layers"].is_null()) {
    active = required<std::vector<int>>(doc, "active_layers", what);
  }
  return Direction(std::move(name), h.space, parse_data(doc, h.layers, h.dim, what),
                   std::move(provenance), std::move(active));
}

Direction read_direction(const std::filesystem::path& path) {
  try {
    return parse_direction(read_file(path));
  } catch (const Error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string write_direction(const Direction& direction) {
  ordered_json doc;
  doc["name"] = direction.name();
  const ordered_json header = header_json(direction.space(), direction.values());
  for (const auto& [k, v] : header.items()) doc[k] = v;
  ordered_json prov;
  if (const auto* pair = std::get_if<PairProvenance>(&direction.provenance())) {
    prov["source_a"] = pair->source_a;
    prov["source_b"] = pair->source_b;
  } else {
    prov["imported"] = std::get<ImportProvenance>(direction.provenance()).path;
  }
  doc["provenance"] = std::move(prov);
  if (direction.active_layers()) {
    doc["active_layers"] = *direction.active_layers();
  } else {
    doc["active_layers"] = nullptr;
  }
  doc["data"] = data_json(direction.values());
  return doc.dump() + "\n";
}

void save_direction(const std::filesystem::path& path, const Direction& direction) {
  write_file_atomic(path, write_direction(direction));
}

// ---------------------------------------------------------------------------
// npy

LatentMatrix<double> parse_npy(const std::string& bytes) {
  static constexpr char kMagic[] = "\x93NUMPY";
  if (bytes.size() < 10 || bytes.compare(0, 6, kMagic, 6) != 0) {
    throw ParseError("npy: bad magic");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) |
                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw ParseError("npy: truncated header");
    for (int i = 0; i < 4; ++i) {
      header_len |= static_cast<std::size_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
    }
    offset = 12;
  } else {
    throw ParseError(fmt::format("npy: unsupported format version {}", major));
  }
  if (bytes.size() < offset + header_len) throw ParseError("npy: truncated header");
  const std::string header = bytes.substr(offset, header_len);
  offset += header_len;

  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('descr'\s*:\s*'([<>|=]?)([a-z])(\d+)')"))) {
    throw ParseError("npy: missing descr");
  }
  const std::string order = m[1];
  const std::string kind = m[2];
  const int width = std::stoi(m[3]);
  if (order == ">" || kind != "f" || (width != 4 && width != 8)) {
    throw ParseError(fmt::format("npy: unsupported dtype '{}{}{}'", order, kind, width));
  }
  if (std::regex_search(header, std::regex(R"('fortran_order'\s*:\s*True)"))) {
    throw ParseError("npy: fortran-ordered arrays are not supported");
  }
  if (!std::regex_search(header, m, std::regex(R"('shape'\s*:\s*\(([^)]*)\))"))) {
    throw ParseError("npy: missing shape");
  }
  std::vector<Eigen::Index> shape;
  {
    const std::string dims = m[1];
    std::regex num(R"(\d+)");
    for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num); it != std::sregex_iterator();
         ++it) {
      shape.push_back(std::stoll(it->str()));
    }
  }
  while (shape.size() > 2 && shape.front() == 1) shape.erase(shape.begin());
  Eigen::Index rows = 1, cols = 0;
  if (shape.size() == 1) {
    cols = shape[0];
  } else if (shape.size() == 2) {
    rows = shape[0];
    cols = shape[1];
  } else {
    throw ParseError("npy: expected a 1-D or 2-D array");
  }
  const std::size_t count = static_cast<std::size_t>(rows * cols);
  if (bytes.size() - offset != count * static_cast<std::size_t>(width)) {
    throw ShapeError(fmt::format("npy: shape {}x{} does not match payload size", rows, cols));
  }
  LatentMatrix<double> values(rows, cols);
  const char* p = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i) {
    if (width == 4) {
      float f;
      std::memcpy(&f, p + i * 4, 4);
      values.data()[i] = static_cast<double>(f);
    } else {
      double d;
      std::memcpy(&d, p + i * 8, 8);
      values.data()[i] = d;
    }
  }
  detail::require_finite(values, "npy array");
  return values;
}

LatentMatrix<double> read_npy(const std::filesystem::path& path) {
  try {
    return parse_npy(read_file(path));
  } catch (const Error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string write_npy(const LatentMatrix<double>& values) {
  std::string header = fmt::format("{{'descr': '<f8', 'fortran_order': False, 'shape': ({}, {}), }}",
                                   values.rows(), values.cols());
  // magic(6) + version(2) + len(2) + header + '\n' padded to a multiple of 64
  std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header.push_back('\n');
  std::string out("\x93NUMPY\x01\x00", 8);
  out.push_back(static_cast<char>(header.size() & 0xff));
  out.push_back(static_cast<char>((header.size() >> 8) & 0xff));
  out += header;
  const std::size_t n = static_cast<std::size_t>(values.size());
  out.append(reinterpret_cast<const char*>(values.data()), n * sizeof(double));
  return out;
}

LatentSpace infer_space(const LatentMatrix<double>& values) {
  if (values.rows() == 1) return LatentSpace::W;
  if (values.rows() == kWPlusLayers) return LatentSpace::WPlus;
  throw ShapeError(fmt::format("cannot infer latent space from {} rows", values.rows()));
}

Direction import_direction(const std::filesystem::path& path, const std::string& name,
                           bool normalize) {
  Direction dir = [&]() {
    if (path.extension() == ".npy") {
      LatentMatrix<double> values = read_npy(path);
      LatentSpace space = infer_space(values);
      return Direction(name, space, std::move(values), ImportProvenance{path.string()});
    }
    const std::string text = read_file(path);
    json doc = parse_json(text, "imported direction");
    if (doc.contains("name")) {
      Direction d = parse_direction(text);
      return Direction(name.empty() ? d.name() : name, d.space(), d.values(),
                       ImportProvenance{path.string()}, d.active_layers());
    }
    LatentCode code = parse_latent(text);
    return Direction(name, code.space(), code.values(), ImportProvenance{path.string()});
  }();
  return normalize ? dir.normalized() : dir;
}

}  // namespace latent_morph
