#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "jfa/data.hpp"
#include "text.hpp"

namespace jfa {
namespace {

constexpr std::string_view kMagic = "# jfa weight model";

std::uint32_t crc_of(const std::string& payload) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

// Everything covered by the checksum: the header fields and W.
std::string payload_of(const WeightModel& m) {
  std::string s;
  s += "format " + std::to_string(kModelFormatVersion) + "\n";
  s += "d_t " + std::to_string(m.d_t()) + "\n";
  s += "d_s " + std::to_string(m.d_s()) + "\n";
  s += "omega " + format_real(m.omega.w1()) + "," + format_real(m.omega.w2()) + "," + format_real(m.omega.w3()) +
       "," + format_real(m.omega.w4()) + "\n";
  s += "lambda " + format_real(m.lambda) + "\n";
  return s;
}

std::string rows_of(const WeightModel& m) {
  std::string s;
  for (std::size_t i = 0; i < m.W.rows(); ++i) s += format_reals(m.W.row(i)) + "\n";
  return s;
}

std::string_view value_after(std::string_view line, std::string_view key, const std::string& source, std::size_t lineno) {
  if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ') {
    throw ParseError(source, lineno, "expected '" + std::string(key) + " ...'");
  }
  return text::trim(line.substr(key.size() + 1));
}

std::size_t parse_count(std::string_view v, const std::string& source, std::size_t lineno) {
  try {
    const double d = parse_real(v);
    if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d))) throw std::invalid_argument("bad");
    return static_cast<std::size_t>(d);
  } catch (const std::invalid_argument&) {
    throw ParseError(source, lineno, "expected a positive integer, got '" + std::string(v) + "'");
  }
}

}  // namespace

void write_model(const WeightModel& model, std::ostream& out) {
  if (!model.W.all_finite()) throw ValidationError("refusing to save a model with non-finite weights");
  const std::string header = payload_of(model);
  const std::string body = rows_of(model);
  out << kMagic << '\n' << header << "checksum " << hex32(crc_of(header + body)) << '\n' << body;
}

WeightModel read_model(std::istream& in, const std::string& source) {
  std::vector<std::string> lines;
  for (std::string raw; std::getline(in, raw);) lines.push_back(raw);
  if (in.bad()) throw IoError(source + ": read failure");
  if (lines.empty() || text::trim(lines[0]) != kMagic) throw ParseError(source, 1, "not a weight model file");
  if (lines.size() < 7) throw IoError(source + ": checksum mismatch (file truncated)");

  const auto format = value_after(lines[1], "format", source, 2);
  if (format != std::to_string(kModelFormatVersion)) {
    throw IoError(source + ": unsupported model format version '" + std::string(format) + "'");
  }
  const std::size_t d_t = parse_count(value_after(lines[2], "d_t", source, 3), source, 3);
  const std::size_t d_s = parse_count(value_after(lines[3], "d_s", source, 4), source, 4);

  const auto checksum = value_after(lines[6], "checksum", source, 7);
  std::string covered;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (i == 6) continue;
    covered += lines[i] + "\n";
  }
  if (checksum != hex32(crc_of(covered)) || lines.size() != 7 + d_t) {
    throw IoError(source + ": checksum mismatch (file corrupted or truncated)");
  }

  try {
    const Vector om = parse_reals(value_after(lines[4], "omega", source, 5));
    if (om.size() != 4) throw ParseError(source, 5, "omega needs 4 components");
    WeightModel m;
    m.omega = OmegaParams(om[0], om[1], om[2], om[3]);
    m.lambda = parse_real(value_after(lines[5], "lambda", source, 6));
    std::vector<double> values;
    values.reserve(d_t * d_s);
    for (std::size_t i = 0; i < d_t; ++i) {
      const Vector row = parse_reals(lines[7 + i]);
      if (row.size() != d_s) throw ParseError(source, 8 + i, "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(d_s));
      values.insert(values.end(), row.begin(), row.end());
    }
    m.W = Matrix(d_t, d_s, std::move(values));
    return m;
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
}

void save_model(const WeightModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_model(model, out);
  if (!out) throw IoError("write failure: " + path.string());
}

WeightModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_model(in, path.string());
}

}  // namespace jfa
