#pragma once

#include <map>
#include <string>
#include <vector>

#include "iclabel/matreader.hpp"
#include "iclabel/types.hpp"

namespace iclabel::conformance {

// Array names accepted in a feature dump.
const std::vector<std::string>& dump_vocabulary();  // topo, psd, acf, probs

struct DumpArray {
  std::vector<std::size_t> dims;
  std::vector<double> data;  // column-major
};

struct FeatureDump {
  std::map<std::string, DumpArray> arrays;
  std::string provenance;
};

struct ArrayComparison {
  std::string name;
  double mdp = 0.0;              // fraction; reported to users as a percentage
  std::size_t element_count = 0;
  std::size_t skipped_zero_pairs = 0;  // both-zero pairs, excluded from mdp
  std::size_t worst_index = 0;
  std::vector<std::size_t> histogram;  // bins over -log10 of relative diff
  double tolerance = 0.0;        // fraction
  bool pass = false;
};

struct ComparisonReport {
  std::vector<ArrayComparison> arrays;
  bool overall_pass = false;
};

// max_i |(ref_i - test_i) / ref_i|. Both-zero pairs contribute 0; a one-sided
// zero contributes +infinity. Errors: LengthMismatch, EmptyInput.
double mdp(const std::vector<double>& f_ref, const std::vector<double>& f_test);

// Per-pair bin floor(-log10(diff)) clamped to [0, max_decimals]; identical
// pairs land in the max_decimals bin. relative selects relative vs absolute
// differences. Errors: LengthMismatch.
std::vector<std::size_t> decimal_histogram(const std::vector<double>& ref,
                                           const std::vector<double>& test,
                                           std::size_t max_decimals,
                                           bool relative = true);

// Default workflow gate: 0.1% expressed as a fraction.
inline constexpr double kDefaultTolerance = 0.001;

ComparisonReport compare_dumps(const FeatureDump& ref, const FeatureDump& test,
                               const std::map<std::string, double>& tolerances);

// Engine dump format: <stem>.json manifest + <stem>.bin raw little-endian f64
// payload. MAT-file dumps are accepted read-only.
void write_dump(const FeatureDump& dump, const std::string& stem);
FeatureDump read_dump(const std::string& path);  // .json manifest or .mat/.set
FeatureDump from_matfile(const matreader::MatFile& file);

}  // namespace iclabel::conformance
