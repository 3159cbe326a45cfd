#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "iclabel/conformance.hpp"
#include "iclabel/dataset.hpp"
#include "iclabel/io_util.hpp"
#include "iclabel/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw iclabel::error("PayloadMissing", "cannot open '" + path + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

iclabel::dataset::EegDataset load_dataset(const std::string& set_path) {
  auto file = iclabel::matreader::parse_mat(read_bytes(set_path));
  fs::path dir = fs::path(set_path).parent_path();
  auto loader = [dir](const std::string& name) {
    return read_bytes((dir / name).string());
  };
  return iclabel::dataset::from_matfile(file, loader);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string table_to_csv(const iclabel::pipeline::ClassificationTable& table) {
  std::ostringstream out;
  out << "component";
  for (const std::string& name : iclabel::pipeline::class_names())
    out << ',' << csv_quote(name);
  out << ",label\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    out << i;
    for (iclabel::Index c = 0; c < row.probabilities.size(); ++c)
      out << ',' << iclabel::io::format_double(row.probabilities[c]);
    out << ','
        << (row.failed ? "failed"
                       : csv_quote(iclabel::pipeline::class_names()
                                       [static_cast<std::size_t>(row.argmax)]))
        << '\n';
  }
  return out.str();
}

std::string table_to_json(const iclabel::pipeline::ClassificationTable& table) {
  json classifications = json::array();
  json labels = json::array();
  for (const auto& row : table.rows) {
    json probs = json::array();
    for (iclabel::Index c = 0; c < row.probabilities.size(); ++c) {
      double v = row.probabilities[c];
      if (std::isnan(v))
        probs.push_back(nullptr);
      else
        // keep byte-stable formatting across runs
        probs.push_back(json::parse(iclabel::io::format_double(v)));
    }
    classifications.push_back(probs);
    labels.push_back(row.failed
                         ? json(nullptr)
                         : json(iclabel::pipeline::class_names()
                                    [static_cast<std::size_t>(row.argmax)]));
  }
  // mirrors the reference access path EEG.etc.ic_classification.ICLabel
  json root;
  root["etc"]["ic_classification"]["ICLabel"]["classes"] =
      iclabel::pipeline::class_names();
  root["etc"]["ic_classification"]["ICLabel"]["classifications"] = classifications;
  root["etc"]["ic_classification"]["ICLabel"]["labels"] = labels;
  return root.dump(2) + "\n";
}

std::map<std::string, double> parse_tolerances(
    const std::vector<std::string>& specs) {
  std::map<std::string, double> out;
  for (const std::string& s : specs) {
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw iclabel::error("BadArgument", "tolerance must be name=fraction: " + s);
    out[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"ICLabel-compatible EEG independent-component classifier"};
  app.require_subcommand(1);

  std::string set_path, weights_path, output_path, format = "csv";
  bool reference_compat = false, no_augment = false;
  int threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads, "worker threads (0 = auto)");
    cmd->add_flag("--reference-compat", reference_compat,
                  "bit-compatible reference behavior (segment subset, dispatch)");
  };

  CLI::App* classify = app.add_subcommand("classify", "classify a dataset");
  classify->add_option("set", set_path, "EEGLAB .set file")->required();
  classify->add_option("--weights", weights_path, "network weights MAT file")
      ->required();
  classify->add_option("-o,--output", output_path, "output file (default stdout)");
  classify->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  classify->add_flag("--no-augment", no_augment, "plain forward pass");
  add_common(classify);

  CLI::App* features = app.add_subcommand("features", "dump features");
  features->add_option("set", set_path, "EEGLAB .set file")->required();
  features->add_option("-o,--output", output_path, "dump stem (writes stem.json/.bin)")
      ->required();
  add_common(features);

  std::string ref_path, test_path;
  std::vector<std::string> tol_specs;
  CLI::App* compare = app.add_subcommand("compare", "compare two dumps");
  compare->add_option("ref", ref_path, "reference dump")->required();
  compare->add_option("test", test_path, "dump under test")->required();
  compare->add_option("--tol", tol_specs, "per-array tolerance, name=fraction");
  compare->add_option("-o,--output", output_path, "report file (default stdout)");

  CLI::App* info = app.add_subcommand("info", "print dataset summary");
  info->add_option("set", set_path, "EEGLAB .set file")->required();

  CLI11_PARSE(app, argc, argv);

  iclabel::pipeline::CompatFlags flags;
  flags.reference_compat = reference_compat;
  flags.augmentation = !no_augment;

  if (info->parsed()) {
    auto ds = load_dataset(set_path);
    std::cout << "channels: " << ds.n_chan << "\n"
              << "srate: " << ds.srate << "\n"
              << "pnts: " << ds.pnts << "\n"
              << "trials: " << ds.trials << "\n"
              << "components: " << ds.ica.n_comp() << "\n";
    return 0;
  }

  if (classify->parsed()) {
    auto ds = load_dataset(set_path);
    auto w = iclabel::network::load_weights(
        iclabel::matreader::parse_mat(read_bytes(weights_path)));
    auto table = iclabel::pipeline::classify(ds, w, flags, threads);
    std::string text = format == "json" ? table_to_json(table) : table_to_csv(table);
    if (output_path.empty())
      std::cout << text;
    else
      iclabel::io::atomic_write_file(output_path, text);
    if (!table.failures.empty()) {
      for (const auto& f : table.failures)
        std::cerr << "error component=" << f.component << " kind=" << f.kind
                  << " msg=" << f.message << "\n";
      return 1;
    }
    return 0;
  }

  if (features->parsed()) {
    auto ds = load_dataset(set_path);
    std::vector<iclabel::pipeline::ComponentFailure> failures;
    auto batch = iclabel::pipeline::extract_features(ds, flags, failures, threads);

    iclabel::conformance::FeatureDump dump;
    dump.provenance = "iclabel-engine features " + set_path;
    iclabel::Index n = batch.size();
    iclabel::conformance::DumpArray topo, psd, acf;
    topo.dims = {static_cast<std::size_t>(n), 32, 32};
    psd.dims = {static_cast<std::size_t>(n), 100};
    acf.dims = {static_cast<std::size_t>(n), 100};
    double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<bool> failed(static_cast<std::size_t>(n), false);
    for (const auto& f : failures)
      failed[static_cast<std::size_t>(f.component)] = true;
    // column-major: component index fastest
    for (int col = 0; col < 32; ++col)
      for (int row = 0; row < 32; ++row)
        for (iclabel::Index c = 0; c < n; ++c)
          topo.data.push_back(failed[static_cast<std::size_t>(c)]
                                  ? nan
                                  : batch.topo[static_cast<std::size_t>(c)](row, col));
    for (int k = 0; k < 100; ++k)
      for (iclabel::Index c = 0; c < n; ++c) {
        psd.data.push_back(failed[static_cast<std::size_t>(c)]
                               ? nan
                               : batch.psd[static_cast<std::size_t>(c)][k]);
        acf.data.push_back(failed[static_cast<std::size_t>(c)]
                               ? nan
                               : batch.acf[static_cast<std::size_t>(c)][k]);
      }
    dump.arrays.emplace("topo", std::move(topo));
    dump.arrays.emplace("psd", std::move(psd));
    dump.arrays.emplace("acf", std::move(acf));
    iclabel::conformance::write_dump(dump, output_path);
    if (!failures.empty()) {
      for (const auto& f : failures)
        std::cerr << "error component=" << f.component << " kind=" << f.kind
                  << " msg=" << f.message << "\n";
      return 1;
    }
    return 0;
  }

  if (compare->parsed()) {
    auto ref = iclabel::conformance::read_dump(ref_path);
    auto test = iclabel::conformance::read_dump(test_path);
    auto report = iclabel::conformance::compare_dumps(ref, test,
                                                      parse_tolerances(tol_specs));
    json j;
    j["overall_pass"] = report.overall_pass;
    json arrays = json::array();
    for (const auto& a : report.arrays) {
      json e;
      e["name"] = a.name;
      e["mdp_percent"] = a.mdp * 100.0;
      e["tolerance_percent"] = a.tolerance * 100.0;
      e["elements"] = a.element_count;
      e["skipped_zero_pairs"] = a.skipped_zero_pairs;
      e["worst_index"] = a.worst_index;
      e["pass"] = a.pass;
      e["decimal_histogram"] = a.histogram;
      arrays.push_back(e);
    }
    j["arrays"] = arrays;
    std::string text = j.dump(2) + "\n";
    if (output_path.empty())
      std::cout << text;
    else
      iclabel::io::atomic_write_file(output_path, text);
    return report.overall_pass ? 0 : 2;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const iclabel::error& e) {
    std::cerr << "error kind=" << e.kind() << " msg=" << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error kind=Internal msg=" << e.what() << "\n";
    return 1;
  }
}
