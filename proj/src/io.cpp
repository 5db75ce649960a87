#include "unseen/io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace unseen::io {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, sep)) parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(const std::string& token, const char* what) {
  T value{};
  const auto t = trim(token);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw FormatError(std::string(what) + ": expected a nonnegative integer, got '" + token + "'");
  }
  return value;
}

}  // namespace

Label LabelTable::intern(const std::string& name) {
  auto [it, inserted] = ids_.try_emplace(name, static_cast<Label>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

const std::string& LabelTable::name(Label id) const {
  if (id >= names_.size()) throw std::out_of_range("LabelTable::name: unknown label id");
  return names_[id];
}

SampleSet read_samples_tsv(std::istream& in, LabelTable& labels, std::size_t m) {
  std::vector<std::pair<std::size_t, Label>> rows;
  std::size_t max_pop = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("samples line " + std::to_string(line_no) +
                        ": expected population_index<TAB>label");
    }
    const auto pop = parse_integer<std::size_t>(line.substr(0, tab), "population_index");
    const std::string label = line.substr(tab + 1);
    if (label.empty()) throw FormatError("samples line " + std::to_string(line_no) + ": empty label");
    max_pop = std::max(max_pop, pop);
    rows.emplace_back(pop, labels.intern(label));
  }
  if (m == 0) m = rows.empty() ? 1 : max_pop + 1;
  if (!rows.empty() && max_pop >= m) {
    throw FormatError("samples: population index " + std::to_string(max_pop) +
                      " out of range for m=" + std::to_string(m));
  }
  SampleSet samples(m);
  for (const auto& [pop, label] : rows) samples.add(pop, label);
  return samples;
}

void write_samples_tsv(std::ostream& out, const SampleSet& samples, const LabelTable* labels) {
  // Deterministic order: by label id, then population.
  std::vector<std::pair<Label, const IndexVector*>> rows;
  rows.reserve(samples.counts().size());
  for (const auto& [label, counts] : samples.counts()) rows.emplace_back(label, &counts);
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [label, counts] : rows) {
    const std::string name = labels ? labels->name(label) : std::to_string(label);
    for (std::size_t j = 0; j < samples.m(); ++j) {
      for (std::uint32_t c = 0; c < (*counts)[j]; ++c) out << j << '\t' << name << '\n';
    }
  }
}

Fingerprint read_fingerprint_tsv(std::istream& in) {
  std::string line;
  std::size_t m = 0;
  Sizes dims;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line.front() != '#') {
      throw FormatError("fingerprint: missing '# m=<m> n=<...>' header");
    }
    std::istringstream ss(line.substr(1));
    std::string field;
    while (ss >> field) {
      if (field.rfind("m=", 0) == 0) {
        m = parse_integer<std::size_t>(field.substr(2), "fingerprint header m");
      } else if (field.rfind("n=", 0) == 0) {
        dims = parse_size_list(field.substr(2));
      }
    }
    if (m == 0 || dims.size() != m) {
      throw FormatError("fingerprint: header must give m>=1 and m comma-separated sizes");
    }
    have_header = true;
    break;
  }
  if (!have_header) throw FormatError("fingerprint: empty input");

  Fingerprint fp(m, dims);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != m + 1) {
      throw FormatError("fingerprint line " + std::to_string(line_no) + ": expected " +
                        std::to_string(m + 1) + " tab-separated columns");
    }
    IndexVector key(m);
    for (std::size_t j = 0; j < m; ++j) key[j] = parse_integer<std::uint32_t>(cols[j], "index");
    const auto count = parse_integer<std::uint64_t>(cols[m], "count");
    if (is_zero(key)) throw FormatError("fingerprint: the all-zero key is not allowed");
    try {
      fp.add(key, count);
    } catch (const std::out_of_range& e) {
      throw FormatError(std::string("fingerprint line ") + std::to_string(line_no) + ": " + e.what());
    }
  }
  return fp;
}

void write_fingerprint_tsv(std::ostream& out, const Fingerprint& fp) {
  out << "# m=" << fp.m() << " n=";
  for (std::size_t j = 0; j < fp.m(); ++j) out << (j ? "," : "") << fp.dims()[j];
  out << '\n';
  for (const auto& [key, count] : fp.entries()) {
    for (auto v : key) out << v << '\t';
    out << count << '\n';
  }
}

nlohmann::json histogram_to_json(const Histogram& h) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [key, entry] : h.entries()) {
    entries.push_back({{"alpha", entry.alpha}, {"mass", entry.mass}});
  }
  return {{"m", h.m()}, {"entries", std::move(entries)}};
}

Histogram histogram_from_json(const nlohmann::json& j) {
  try {
    const auto m = j.at("m").get<std::size_t>();
    Histogram h(m);
    for (const auto& e : j.at("entries")) {
      h.add(e.at("alpha").get<ProbVector>(), e.at("mass").get<double>());
    }
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("histogram JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("histogram JSON: ") + e.what());
  }
}

Histogram read_histogram_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("histogram JSON: ") + e.what());
  }
  return histogram_from_json(j);
}

void write_histogram_json(std::ostream& out, const Histogram& h) {
  out << histogram_to_json(h).dump(2) << '\n';
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) {
    const auto t = trim(part);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw FormatError("expected a number, got '" + part + "'");
    }
    if (used != t.size()) throw FormatError("expected a number, got '" + part + "'");
    values.push_back(v);
  }
  if (values.empty()) throw FormatError("empty list");
  return values;
}

Sizes parse_size_list(const std::string& text) {
  Sizes values;
  for (const auto& part : split(text, ',')) values.push_back(parse_integer<std::uint64_t>(part, "size"));
  if (values.empty()) throw FormatError("empty list");
  return values;
}

}  // namespace unseen::io
