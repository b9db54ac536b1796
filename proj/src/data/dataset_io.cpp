#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "jfa/data.hpp"
#include "text.hpp"

namespace jfa {

namespace text {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string_view clean_line(std::string_view line) {
  const auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  return trim(line);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace text

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : IoError(source + ":" + std::to_string(line) + ": " + what) {}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_reals(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_real(v[i]);
  }
  return out;
}

double parse_real(std::string_view text) {
  text = text::trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a real number: '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value: '" + std::string(text) + "'");
  return v;
}

Vector parse_reals(std::string_view text) {
  Vector out;
  if (text::trim(text).empty()) return out;
  for (auto tok : text::split(text, ',')) out.push_back(parse_real(tok));
  return out;
}

namespace {

std::int64_t parse_id(std::string_view text) {
  text = text::trim(text);
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not an integer id: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<ClassId> parse_ids(std::string_view text) {
  std::vector<ClassId> out;
  if (text::trim(text).empty()) return out;
  for (auto tok : text::split(text, ',')) out.push_back(parse_id(tok));
  return out;
}

template <class Fn>
void for_each_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::clean_line(raw);
    if (line.empty()) continue;
    try {
      fn(line);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError(source + ": read failure");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

Dataset read_dataset(std::istream& classes, std::istream& instances, std::istream& split,
                     const std::string& source_prefix) {
  Dataset d;
  const std::string classes_src = source_prefix + kClassesFile;
  const std::string instances_src = source_prefix + kInstancesFile;
  const std::string split_src = source_prefix + kSplitFile;

  for_each_line(classes, classes_src, [&](std::string_view line) {
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2) throw std::invalid_argument("expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    ClassEmbedding c{parse_id(fields[0]), parse_reals(fields[1])};
    if (d.classes.empty()) d.d_s = c.psi.size();
    if (c.psi.size() != d.d_s) {
      throw ValidationError("psi has " + std::to_string(c.psi.size()) + " entries, expected " + std::to_string(d.d_s));
    }
    d.classes.push_back(std::move(c));
  });

  for_each_line(instances, instances_src, [&](std::string_view line) {
    const auto fields = text::split(line, '\t');
    if (fields.size() != 3) throw std::invalid_argument("expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    EmbeddedInstance x;
    x.id = parse_id(fields[0]);
    const auto label = text::trim(fields[1]);
    if (!label.empty() && label != "-") x.label = parse_id(label);
    x.phi = parse_reals(fields[2]);
    if (d.instances.empty()) d.d_t = x.phi.size();
    if (x.phi.size() != d.d_t) {
      throw ValidationError("phi has " + std::to_string(x.phi.size()) + " entries, expected " + std::to_string(d.d_t));
    }
    if (x.label && !d.find_class(*x.label)) throw ValidationError("unknown class label " + std::to_string(*x.label));
    d.instances.push_back(std::move(x));
  });

  bool have_seen = false, have_unseen = false;
  for_each_line(split, split_src, [&](std::string_view line) {
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("expected 'seen:' or 'unseen:'");
    const auto key = text::trim(line.substr(0, colon));
    auto ids = parse_ids(line.substr(colon + 1));
    std::vector<ClassId>* target = nullptr;
    if (key == "seen") {
      if (have_seen) throw std::invalid_argument("duplicate 'seen:' line");
      have_seen = true;
      target = &d.seen;
    } else if (key == "unseen") {
      if (have_unseen) throw std::invalid_argument("duplicate 'unseen:' line");
      have_unseen = true;
      target = &d.unseen;
    } else {
      throw std::invalid_argument("unknown split key '" + std::string(key) + "'");
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw std::invalid_argument("repeated class id in split");
    *target = std::move(ids);
  });
  if (!have_seen || !have_unseen) throw ParseError(split_src, 0, "split needs both 'seen:' and 'unseen:' lines");
  if (d.classes.empty()) throw ParseError(classes_src, 0, "no classes defined");
  if (d.instances.empty() && d.d_t == 0) throw ParseError(instances_src, 0, "no instances defined");

  d.validate();
  return d;
}

Dataset load_dataset(const std::filesystem::path& classes, const std::filesystem::path& instances,
                     const std::filesystem::path& split) {
  auto c = open_input(classes);
  auto i = open_input(instances);
  auto s = open_input(split);
  const auto dir = classes.parent_path();
  return read_dataset(c, i, s, dir.empty() ? std::string() : dir.string() + "/");
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a dataset directory: " + dir.string());
  return load_dataset(dir / kClassesFile, dir / kInstancesFile, dir / kSplitFile);
}

void write_classes(const Dataset& d, std::ostream& out) {
  out << "# class_id\tpsi\n";
  for (const auto& c : d.classes) out << c.label << '\t' << format_reals(c.psi) << '\n';
}

void write_instances(const Dataset& d, std::ostream& out) {
  out << "# instance_id\tclass_id\tphi\n";
  for (const auto& x : d.instances) {
    out << x.id << '\t';
    if (x.label) {
      out << *x.label;
    } else {
      out << '-';
    }
    out << '\t' << format_reals(x.phi) << '\n';
  }
}

void write_split(const Dataset& d, std::ostream& out) {
  auto ids = [](const std::vector<ClassId>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v[i]);
    }
    return s;
  };
  out << "seen: " << ids(d.seen) << '\n';
  out << "unseen: " << ids(d.unseen) << '\n';
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  dataset.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto c = open_output(dir / kClassesFile);
  write_classes(dataset, c);
  auto i = open_output(dir / kInstancesFile);
  write_instances(dataset, i);
  auto s = open_output(dir / kSplitFile);
  write_split(dataset, s);
  if (!c || !i || !s) throw IoError("write failure in " + dir.string());
}

void check_model_matches(const WeightModel& model, const Dataset& data) {
  if (model.d_t() != data.d_t || model.d_s() != data.d_s) {
    throw ValidationError("model is " + std::to_string(model.d_t()) + "x" + std::to_string(model.d_s()) +
                          " but the dataset has d_t=" + std::to_string(data.d_t) + ", d_s=" + std::to_string(data.d_s));
  }
}

}  // namespace jfa
