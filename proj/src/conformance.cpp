#include "iclabel/conformance.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "iclabel/io_util.hpp"

namespace iclabel::conformance {

namespace {

using nlohmann::json;

double pair_relative_diff(double r, double t) {
  if (r == 0.0 && t == 0.0) return 0.0;
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs((r - t) / r);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("PayloadMissing", "cannot open '" + path + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

}  // namespace

const std::vector<std::string>& dump_vocabulary() {
  static const std::vector<std::string> v = {"topo", "psd", "acf", "probs"};
  return v;
}

double mdp(const std::vector<double>& f_ref, const std::vector<double>& f_test) {
  if (f_ref.size() != f_test.size())
    throw error("LengthMismatch", std::to_string(f_ref.size()) + " vs " +
                                      std::to_string(f_test.size()) + " elements");
  if (f_ref.empty()) throw error("EmptyInput", "nothing to compare");
  double worst = 0.0;
  for (std::size_t i = 0; i < f_ref.size(); ++i)
    worst = std::max(worst, pair_relative_diff(f_ref[i], f_test[i]));
  return worst;
}

std::vector<std::size_t> decimal_histogram(const std::vector<double>& ref,
                                           const std::vector<double>& test,
                                           std::size_t max_decimals,
                                           bool relative) {
  if (ref.size() != test.size())
    throw error("LengthMismatch", std::to_string(ref.size()) + " vs " +
                                      std::to_string(test.size()) + " elements");
  std::vector<std::size_t> bins(max_decimals + 1, 0);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    double d = relative ? pair_relative_diff(ref[i], test[i])
                        : std::abs(ref[i] - test[i]);
    std::size_t bin;
    if (d == 0.0) {
      bin = max_decimals;
    } else if (std::isinf(d)) {
      bin = 0;
    } else {
      double decimals = std::floor(-std::log10(d));
      bin = decimals <= 0.0 ? 0
                            : std::min<std::size_t>(
                                  static_cast<std::size_t>(decimals), max_decimals);
    }
    ++bins[bin];
  }
  return bins;
}

ComparisonReport compare_dumps(const FeatureDump& ref, const FeatureDump& test,
                               const std::map<std::string, double>& tolerances) {
  ComparisonReport report;
  report.overall_pass = true;
  bool any_shared = false;
  for (const auto& [name, ra] : ref.arrays) {
    auto it = test.arrays.find(name);
    if (it == test.arrays.end()) continue;
    any_shared = true;
    const DumpArray& ta = it->second;
    if (ra.dims != ta.dims || ra.data.size() != ta.data.size())
      throw error("ShapeMismatch", "array '" + name + "' extents differ");

    ArrayComparison cmp;
    cmp.name = name;
    cmp.element_count = ra.data.size();
    cmp.tolerance = kDefaultTolerance;
    if (auto t = tolerances.find(name); t != tolerances.end())
      cmp.tolerance = t->second;

    double worst = 0.0;
    for (std::size_t i = 0; i < ra.data.size(); ++i) {
      double r = ra.data[i];
      double v = ta.data[i];
      if (r == 0.0 && v == 0.0) {
        ++cmp.skipped_zero_pairs;
        continue;
      }
      double d = pair_relative_diff(r, v);
      if (d > worst) {
        worst = d;
        cmp.worst_index = i;
      }
    }
    cmp.mdp = worst;
    cmp.histogram = decimal_histogram(ra.data, ta.data, 12, true);
    cmp.pass = cmp.mdp <= cmp.tolerance;
    report.overall_pass = report.overall_pass && cmp.pass;
    report.arrays.push_back(std::move(cmp));
  }
  if (!any_shared) throw error("NoOverlap", "dumps share no array names");
  return report;
}

void write_dump(const FeatureDump& dump, const std::string& stem) {
  json manifest;
  manifest["format"] = "iclabel-dump-v1";
  manifest["provenance"] = dump.provenance;
  manifest["payload"] = stem.substr(stem.find_last_of('/') + 1) + ".bin";
  json arrays = json::array();

  std::string payload;
  std::size_t offset = 0;
  for (const auto& [name, arr] : dump.arrays) {
    json a;
    a["name"] = name;
    a["kind"] = "f64";
    a["dims"] = arr.dims;
    a["offset"] = offset;
    a["count"] = arr.data.size();
    arrays.push_back(a);
    std::size_t bytes = arr.data.size() * sizeof(double);
    std::size_t old = payload.size();
    payload.resize(old + bytes);
    // engine dumps are little-endian; this writer targets LE hosts
    std::memcpy(payload.data() + old, arr.data.data(), bytes);
    offset += bytes;
  }
  manifest["arrays"] = arrays;
  io::atomic_write_file(stem + ".bin", payload);
  io::atomic_write_file(stem + ".json", manifest.dump(2) + "\n");
}

FeatureDump from_matfile(const matreader::MatFile& file) {
  FeatureDump dump;
  dump.provenance = "mat:" + file.header_text;
  for (const std::string& name : dump_vocabulary()) {
    if (!file.has(name)) continue;
    const matreader::MatValue& v = file.var(name);
    if (!v.is_numeric()) continue;
    DumpArray a;
    a.dims = v.numeric().dims;
    a.data = v.numeric().data;
    dump.arrays.emplace(name, std::move(a));
  }
  if (dump.arrays.empty())
    throw error("NoOverlap", "MAT file holds no dump arrays (topo/psd/acf/probs)");
  return dump;
}

FeatureDump read_dump(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    std::ifstream in(path);
    if (!in) throw error("PayloadMissing", "cannot open '" + path + "'");
    json manifest = json::parse(in, nullptr, false);
    if (manifest.is_discarded())
      throw error("BadStream", "'" + path + "' is not valid JSON");
    if (manifest.value("format", "") != "iclabel-dump-v1")
      throw error("BadStream", "'" + path + "' is not an engine dump manifest");

    std::string dir;
    if (auto slash = path.find_last_of('/'); slash != std::string::npos)
      dir = path.substr(0, slash + 1);
    std::vector<std::uint8_t> payload =
        read_file_bytes(dir + manifest.at("payload").get<std::string>());

    FeatureDump dump;
    dump.provenance = manifest.value("provenance", "");
    for (const json& a : manifest.at("arrays")) {
      DumpArray arr;
      arr.dims = a.at("dims").get<std::vector<std::size_t>>();
      std::size_t count = a.at("count").get<std::size_t>();
      std::size_t offset = a.at("offset").get<std::size_t>();
      if (a.value("kind", "f64") != "f64")
        throw error("BadStream", "unsupported dump element kind");
      if (offset + count * sizeof(double) > payload.size())
        throw error("Truncated", "dump payload shorter than the manifest claims");
      arr.data.resize(count);
      std::memcpy(arr.data.data(), payload.data() + offset,
                  count * sizeof(double));
      dump.arrays.emplace(a.at("name").get<std::string>(), std::move(arr));
    }
    return dump;
  }
  return from_matfile(matreader::parse_mat(read_file_bytes(path)));
}

}  // namespace iclabel::conformance
