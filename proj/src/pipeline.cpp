#include "iclabel/pipeline.hpp"

#include <cmath>
#include <limits>
#include <thread>

#include "iclabel/autocorr.hpp"
#include "iclabel/spectral.hpp"
#include "iclabel/topomap.hpp"

namespace iclabel::pipeline {

namespace {

constexpr double kFeatureScale = 0.99;

int resolve_threads(int threads, Index jobs) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  return static_cast<int>(std::min<Index>(threads, std::max<Index>(jobs, 1)));
}

// Index-partitioned parallel map; slot writes keep results independent of
// the schedule.
template <typename Fn>
void parallel_for(Index n, int threads, Fn&& fn) {
  threads = resolve_threads(threads, n);
  if (threads == 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (Index i = t; i < n; i += threads) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace

const std::vector<std::string>& class_names() {
  // network-native output order of the published weights
  static const std::vector<std::string> names = {
      "Brain", "Muscle", "Eye", "Heart", "Line Noise", "Channel Noise", "Other"};
  return names;
}

network::FeatureBatch extract_features(const dataset::EegDataset& ds,
                                       const CompatFlags& flags,
                                       std::vector<ComponentFailure>& failures,
                                       int threads) {
  Index n_comp = ds.ica.n_comp();
  Tensor3 act = dataset::ica_activations(ds);

  // geometry problems affect every component; fail the dataset up front
  topomap::ElectrodePlane plane = topomap::project_electrodes(ds.chanlocs);
  (void)plane;

  network::FeatureBatch batch;
  batch.topo.assign(static_cast<std::size_t>(n_comp), Mat::Zero(32, 32));
  batch.psd.assign(static_cast<std::size_t>(n_comp), Vec::Zero(100));
  batch.acf.assign(static_cast<std::size_t>(n_comp), Vec::Zero(100));

  std::vector<ComponentFailure> slot_failures(static_cast<std::size_t>(n_comp),
                                              ComponentFailure{-1, "", ""});

  parallel_for(n_comp, threads, [&](Index c) {
    std::size_t sc = static_cast<std::size_t>(c);
    try {
      Mat activation(ds.pnts, ds.trials);
      for (Index t = 0; t < ds.trials; ++t)
        activation.col(t) = act.slab(t).row(c).transpose();

      topomap::ScalpGrid grid = topomap::topo_feature(ds, c);
      Mat topo = grid.values;
      double topo_max = topo.cwiseAbs().maxCoeff();
      if (topo_max > 0.0) topo /= topo_max;
      batch.topo[sc] = topo * kFeatureScale;

      spectral::PsdFeature psd =
          spectral::psd_feature(activation, ds.srate, flags.reference_compat);
      Vec p = psd.values;
      double psd_max = p.cwiseAbs().maxCoeff();
      if (psd_max > 0.0) p /= psd_max;
      batch.psd[sc] = p * kFeatureScale;

      autocorr::AcfFeature acf =
          autocorr::acf_feature(activation, ds.srate, flags.reference_compat);
      batch.acf[sc] = acf.values * kFeatureScale;
    } catch (const error& e) {
      slot_failures[sc] = ComponentFailure{c, e.kind(), e.what()};
    } catch (const std::exception& e) {
      slot_failures[sc] = ComponentFailure{c, "Internal", e.what()};
    }
  });

  for (const ComponentFailure& f : slot_failures)
    if (f.component >= 0) failures.push_back(f);
  return batch;
}

ClassificationTable classify(const dataset::EegDataset& ds,
                             const network::NetworkWeights& w,
                             const CompatFlags& flags, int threads) {
  ClassificationTable table;
  network::FeatureBatch batch = extract_features(ds, flags, table.failures, threads);
  Index n_comp = batch.size();

  std::vector<bool> failed(static_cast<std::size_t>(n_comp), false);
  for (const ComponentFailure& f : table.failures)
    failed[static_cast<std::size_t>(f.component)] = true;

  network::FeatureBatch ok;
  std::vector<Index> ok_index;
  for (Index c = 0; c < n_comp; ++c) {
    if (failed[static_cast<std::size_t>(c)]) continue;
    std::size_t sc = static_cast<std::size_t>(c);
    ok.topo.push_back(batch.topo[sc]);
    ok.psd.push_back(batch.psd[sc]);
    ok.acf.push_back(batch.acf[sc]);
    ok_index.push_back(c);
  }

  Mat probs(0, network::kNumClasses);
  if (ok.size() > 0) {
    probs = flags.augmentation ? network::infer_augmented(w, ok).table
                               : network::softmax7(network::forward(w, ok)).table;
  }

  table.rows.resize(static_cast<std::size_t>(n_comp));
  double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t sc = 0; sc < table.rows.size(); ++sc) {
    table.rows[sc].probabilities = Vec::Constant(network::kNumClasses, nan);
    table.rows[sc].failed = true;
  }
  for (std::size_t i = 0; i < ok_index.size(); ++i) {
    ClassificationRow& row =
        table.rows[static_cast<std::size_t>(ok_index[i])];
    row.probabilities = probs.row(static_cast<Index>(i)).transpose();
    Index arg;
    row.probabilities.maxCoeff(&arg);
    row.argmax = static_cast<int>(arg);
    row.failed = false;
  }
  return table;
}

}  // namespace iclabel::pipeline
