#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>

#include "unseen/fingerprint.hpp"
#include "unseen/histogram.hpp"

#include "json.hpp"

namespace unseen::io {

/// Bidirectional string <-> Label mapping for text-labeled inputs.
class LabelTable {
public:
  Label intern(const std::string& name);
  const std::string& name(Label id) const;
  std::size_t size() const noexcept { return names_.size(); }

private:
  std::unordered_map<std::string, Label> ids_;
  std::vector<std::string> names_;
};

/// Sample TSV: `population_index<TAB>label` per observation, 0-based index.
/// Blank lines and lines starting with '#' are skipped. `m` of zero means
/// "infer from the largest index".
SampleSet read_samples_tsv(std::istream& in, LabelTable& labels, std::size_t m = 0);
void write_samples_tsv(std::ostream& out, const SampleSet& samples, const LabelTable* labels);

/// Fingerprint TSV: header `# m=<m> n=<n_1,...,n_m>`, then one row per key
/// with m index columns followed by the count.
Fingerprint read_fingerprint_tsv(std::istream& in);
void write_fingerprint_tsv(std::ostream& out, const Fingerprint& fp);

/// Histogram JSON: {"m": m, "entries": [{"alpha": [...], "mass": x}, ...]}.
nlohmann::json histogram_to_json(const Histogram& h);
Histogram histogram_from_json(const nlohmann::json& j);

Histogram read_histogram_json(std::istream& in);
void write_histogram_json(std::ostream& out, const Histogram& h);

/// Comma-separated list parsing shared by the CLI: "1,2.5,3".
std::vector<double> parse_real_list(const std::string& text);
Sizes parse_size_list(const std::string& text);

}  // namespace unseen::io
