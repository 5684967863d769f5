// Python bindings for the dyadflow core library.  The surface mirrors the
// C++ API: simulation, force reconstruction, filtering, GGC estimation,
// permutation thresholds, the statistics battery, and the full pipeline
// drivers used by the CLI subcommands.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <utility>

#include "dyadflow/behavior.hpp"
#include "dyadflow/force.hpp"
#include "dyadflow/ggc.hpp"
#include "dyadflow/io.hpp"
#include "dyadflow/pipeline.hpp"
#include "dyadflow/signal.hpp"
#include "dyadflow/sim.hpp"
#include "dyadflow/stats.hpp"
#include "dyadflow/surrogate.hpp"
#include "dyadflow/var.hpp"

namespace py = pybind11;
using namespace dyadflow;

namespace {

std::vector<EpochPair> to_epoch_pairs(const std::vector<std::pair<Epoch, Epoch>>& pairs) {
  std::vector<EpochPair> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.push_back({a, b});
  return out;
}

std::vector<std::vector<double>> matrix_to_lists(const Eigen::Matrix2d& m) {
  return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}};
}

}  // namespace

PYBIND11_MODULE(_dyadflow, m) {
  m.doc() = "Directional force-interaction analysis for dyadic recordings";

  py::register_exception<Error>(m, "DyadflowError");

  // ------------------------------------------------------------ channels
  py::class_<Channel>(m, "Channel")
      .def(py::init([](std::vector<double> samples, double fs, std::string label) {
             return make_channel(std::move(samples), fs, std::move(label));
           }),
           py::arg("samples"), py::arg("fs"), py::arg("label") = std::string())
      .def_readwrite("samples", &Channel::samples)
      .def_readwrite("fs", &Channel::fs)
      .def_readwrite("label", &Channel::label)
      .def("__len__", [](const Channel& c) { return c.samples.size(); });

  py::class_<Epoch>(m, "Epoch")
      .def(py::init([](std::vector<double> samples, double fs, std::string parent_trial,
                       int window_index) {
             Epoch e;
             e.samples = std::move(samples);
             e.fs = fs;
             e.parent_trial = std::move(parent_trial);
             e.window_index = window_index;
             return e;
           }),
           py::arg("samples"), py::arg("fs"), py::arg("parent_trial") = std::string(),
           py::arg("window_index") = 0)
      .def_readwrite("samples", &Epoch::samples)
      .def_readwrite("fs", &Epoch::fs)
      .def_readwrite("parent_trial", &Epoch::parent_trial)
      .def_readwrite("window_index", &Epoch::window_index)
      .def("__len__", [](const Epoch& e) { return e.samples.size(); });

  // ---------------------------------------------------------- force model
  py::class_<DyadMasses>(m, "DyadMasses")
      .def(py::init([](double m1, double m2, double M) { return DyadMasses{m1, m2, M}; }),
           py::arg("m1"), py::arg("m2"), py::arg("M"))
      .def_readwrite("m1", &DyadMasses::m1)
      .def_readwrite("m2", &DyadMasses::m2)
      .def_readwrite("M", &DyadMasses::M);

  py::class_<ForcePair>(m, "ForcePair")
      .def_readonly("f1", &ForcePair::f1)
      .def_readonly("f2", &ForcePair::f2)
      .def_readonly("acceleration", &ForcePair::acceleration);

  py::class_<SensorPair>(m, "SensorPair")
      .def_readonly("s1", &SensorPair::s1)
      .def_readonly("s2", &SensorPair::s2)
      .def_readonly("acceleration", &SensorPair::acceleration);

  m.def("reconstruct_forces", &reconstruct_forces, py::arg("s1"), py::arg("s2"),
        py::arg("masses"), "Per-participant applied forces from the two sensor series");
  m.def("invert_forces", &invert_forces, py::arg("f1"), py::arg("f2"), py::arg("masses"),
        "Exact inverse of reconstruct_forces");

  // -------------------------------------------------------------- signal
  m.def("lowpass", &butterworth_lowpass_dualpass, py::arg("x"), py::arg("fc_hz"),
        py::arg("order"), "Zero-phase Butterworth low-pass (forward + backward)");
  m.def("highpass", &butterworth_highpass_dualpass, py::arg("x"), py::arg("fc_hz"),
        py::arg("order"));
  m.def("bandpass", &bandpass_dualpass, py::arg("x"), py::arg("f_lo_hz"), py::arg("f_hi_hz"),
        py::arg("order"));
  m.def("decimate", &decimate, py::arg("x"), py::arg("target_fs"));
  m.def("epoch_split", &epoch_split, py::arg("x"), py::arg("k"),
        py::arg("parent_trial") = std::string());

  // ------------------------------------------------------------ trials
  py::class_<TrialCondition>(m, "TrialCondition")
      .def(py::init<>())
      .def_readwrite("target_distance_m", &TrialCondition::target_distance_m)
      .def_readwrite("metronome_period_s", &TrialCondition::metronome_period_s)
      .def_readwrite("role_a", &TrialCondition::role_a)
      .def_readwrite("role_b", &TrialCondition::role_b);

  py::class_<TrialRecord>(m, "TrialRecord")
      .def(py::init<>())
      .def_readwrite("trial_id", &TrialRecord::trial_id)
      .def_readwrite("dyad_id", &TrialRecord::dyad_id)
      .def_readwrite("s1", &TrialRecord::s1)
      .def_readwrite("s2", &TrialRecord::s2)
      .def_readwrite("position", &TrialRecord::position)
      .def_readwrite("beats", &TrialRecord::beats)
      .def_readwrite("condition", &TrialRecord::condition);

  // ---------------------------------------------------------- simulation
  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("movement_freq_hz", &SimConfig::movement_freq_hz)
      .def_readwrite("movement_amp_n", &SimConfig::movement_amp_n)
      .def_readwrite("coupling_gain", &SimConfig::coupling_gain)
      .def_readwrite("coupling_band_lo_hz", &SimConfig::coupling_band_lo_hz)
      .def_readwrite("coupling_band_hi_hz", &SimConfig::coupling_band_hi_hz)
      .def_readwrite("coupling_delay_s", &SimConfig::coupling_delay_s)
      .def_property(
          "direction", [](const SimConfig& c) { return to_string(c.direction); },
          [](SimConfig& c, const std::string& s) { c.direction = coupling_direction_from_string(s); })
      .def_readwrite("noise_sd_a_n", &SimConfig::noise_sd_a_n)
      .def_readwrite("noise_sd_b_n", &SimConfig::noise_sd_b_n)
      .def_readwrite("role_amp_ratio", &SimConfig::role_amp_ratio)
      .def_readwrite("phase_jitter_sd_rad", &SimConfig::phase_jitter_sd_rad)
      .def_readwrite("masses", &SimConfig::masses)
      .def_readwrite("fs_hz", &SimConfig::fs_hz)
      .def_readwrite("duration_s", &SimConfig::duration_s)
      .def_readwrite("silence_s", &SimConfig::silence_s)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("n_dyads", &SimConfig::n_dyads);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_property_readonly("direction",
                             [](const GroundTruth& g) { return to_string(g.direction); })
      .def_readonly("band_lo_hz", &GroundTruth::band_lo_hz)
      .def_readonly("band_hi_hz", &GroundTruth::band_hi_hz)
      .def_readonly("gain", &GroundTruth::gain);

  py::class_<SimTrial>(m, "SimTrial")
      .def_readonly("trial", &SimTrial::trial)
      .def_readonly("truth", &SimTrial::truth);

  m.def("simulate", &simulate, py::arg("config"),
        "One synthetic dyad trial with known ground-truth coupling");

  // ----------------------------------------------------------------- GGC
  py::class_<GgcOptions>(m, "GgcOptions")
      .def(py::init([](int p_max, int fixed_p, double freq_step_hz) {
             return GgcOptions{p_max, fixed_p, freq_step_hz};
           }),
           py::arg("p_max") = 20, py::arg("fixed_p") = 0, py::arg("freq_step_hz") = 0.05)
      .def_readwrite("p_max", &GgcOptions::p_max)
      .def_readwrite("fixed_p", &GgcOptions::fixed_p)
      .def_readwrite("freq_step_hz", &GgcOptions::freq_step_hz);

  py::class_<GgcSpectrum>(m, "GgcSpectrum")
      .def_readonly("freqs", &GgcSpectrum::freqs)
      .def_readonly("a_to_b", &GgcSpectrum::a_to_b)
      .def_readonly("b_to_a", &GgcSpectrum::b_to_a);

  py::class_<VarModel>(m, "VarModel")
      .def_readonly("order", &VarModel::order)
      .def_readonly("fs", &VarModel::fs)
      .def_readonly("n_samples", &VarModel::n_samples)
      .def_property_readonly("sigma",
                             [](const VarModel& v) { return matrix_to_lists(v.sigma); })
      .def_property_readonly("coeffs", [](const VarModel& v) {
        std::vector<std::vector<std::vector<double>>> out;
        out.reserve(v.coeffs.size());
        for (const auto& a : v.coeffs) out.push_back(matrix_to_lists(a));
        return out;
      });

  py::class_<GgcResult>(m, "GgcResult")
      .def_readonly("spectrum", &GgcResult::spectrum)
      .def_readonly("model", &GgcResult::model);

  m.def(
      "ggc_from_epochs",
      [](const std::vector<std::pair<Epoch, Epoch>>& pairs, const GgcOptions& opt) {
        return ggc_from_epochs(to_epoch_pairs(pairs), opt);
      },
      py::arg("pairs"), py::arg("options") = GgcOptions{},
      "Directional influence curves from (epoch_a, epoch_b) pairs");
  m.def("band_integral", &band_integral, py::arg("freqs"), py::arg("curve"), py::arg("f_lo"),
        py::arg("f_hi"));

  // ----------------------------------------------------------- surrogates
  py::class_<ThresholdCurve>(m, "ThresholdCurve")
      .def_readonly("freqs", &ThresholdCurve::freqs)
      .def_readonly("q99", &ThresholdCurve::q99)
      .def_readonly("n_perm", &ThresholdCurve::n_perm)
      .def_readonly("seed", &ThresholdCurve::seed);

  m.def(
      "surrogate_threshold",
      [](const std::vector<std::tuple<std::string, std::string, std::vector<Epoch>>>& pool,
         int n_perm, uint64_t seed, const GgcOptions& opt, double q) {
        std::vector<IndividualSeries> p;
        p.reserve(pool.size());
        for (const auto& [individual, dyad, epochs] : pool) {
          p.push_back({individual, dyad, epochs});
        }
        return threshold_from_ensemble(surrogate_ensemble(std::move(p), n_perm, seed, opt), q);
      },
      py::arg("pool"), py::arg("n_perm") = 506, py::arg("seed") = 2024,
      py::arg("options") = GgcOptions{}, py::arg("q") = 0.99,
      "Permutation-null threshold from (individual_id, dyad_id, epochs) entries");

  // ------------------------------------------------------------ statistics
  py::class_<TestResult>(m, "TestResult")
      .def_readonly("statistic", &TestResult::statistic)
      .def_readonly("p_value", &TestResult::p_value)
      .def_readonly("df", &TestResult::df)
      .def_readonly("n", &TestResult::n)
      .def_readonly("method", &TestResult::method);

  py::class_<ShapiroResult>(m, "ShapiroResult")
      .def_readonly("w", &ShapiroResult::w)
      .def_readonly("p_value", &ShapiroResult::p_value);

  py::class_<CorrelationResult>(m, "CorrelationResult")
      .def_readonly("r", &CorrelationResult::r)
      .def_readonly("p_value", &CorrelationResult::p_value)
      .def_readonly("n", &CorrelationResult::n);

  m.def(
      "t_test_one_sample",
      [](const std::vector<double>& x, double mu0) {
        return t_test_one_sample(std::span<const double>(x), mu0);
      },
      py::arg("x"), py::arg("mu0") = 0.0);
  m.def(
      "t_test_paired",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return t_test_paired(std::span<const double>(x), std::span<const double>(y));
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "t_test_two_sample",
      [](const std::vector<double>& x, const std::vector<double>& y, bool welch) {
        return t_test_two_sample(std::span<const double>(x), std::span<const double>(y), welch);
      },
      py::arg("x"), py::arg("y"), py::arg("welch") = false);
  m.def(
      "rank_sum",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return rank_sum(std::span<const double>(x), std::span<const double>(y));
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "signed_rank",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return signed_rank(std::span<const double>(x), std::span<const double>(y));
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "ks_two_sample",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return ks_two_sample(std::span<const double>(x), std::span<const double>(y));
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "shapiro_wilk",
      [](const std::vector<double>& x) { return shapiro_wilk(std::span<const double>(x)); },
      py::arg("x"));
  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return pearson(std::span<const double>(x), std::span<const double>(y));
      },
      py::arg("x"), py::arg("y"));

  // ------------------------------------------------------- pipeline drivers
  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("filter_fc_hz", &PipelineConfig::filter_fc_hz)
      .def_readwrite("filter_order", &PipelineConfig::filter_order)
      .def_readwrite("downsample_fs_hz", &PipelineConfig::downsample_fs_hz)
      .def_readwrite("epochs_per_trial", &PipelineConfig::epochs_per_trial)
      .def_readwrite("p_max", &PipelineConfig::p_max)
      .def_readwrite("fixed_p", &PipelineConfig::fixed_p)
      .def_readwrite("freq_step_hz", &PipelineConfig::freq_step_hz)
      .def_readwrite("freq_max_hz", &PipelineConfig::freq_max_hz)
      .def_readwrite("n_perm", &PipelineConfig::n_perm)
      .def_readwrite("seed", &PipelineConfig::seed)
      .def_property(
          "band_mode",
          [](const PipelineConfig& c) {
            return c.band_mode == BandMode::automatic ? "automatic" : "fixed";
          },
          [](PipelineConfig& c, const std::string& s) {
            if (s == "automatic") {
              c.band_mode = BandMode::automatic;
            } else if (s == "fixed") {
              c.band_mode = BandMode::fixed;
            } else {
              throw Error("config-error", "band_mode must be automatic|fixed, got " + s);
            }
          })
      .def_readwrite("fixed_f1_hz", &PipelineConfig::fixed_f1_hz)
      .def_readwrite("fixed_f2_hz", &PipelineConfig::fixed_f2_hz)
      .def_readwrite("pe_normalizer", &PipelineConfig::pe_normalizer)
      .def_readwrite("target_width_m", &PipelineConfig::target_width_m)
      .def_readwrite("prominence_fraction", &PipelineConfig::prominence_fraction)
      .def_readwrite("normality_alpha", &PipelineConfig::normality_alpha)
      .def_readwrite("coefficients_path", &PipelineConfig::coefficients_path);

  m.def(
      "preprocess_trial",
      [](const TrialRecord& t, const DyadMasses& masses, const PipelineConfig& cfg) {
        std::vector<std::pair<Epoch, Epoch>> out;
        for (EpochPair& p : preprocess_trial(t, masses, cfg)) {
          out.emplace_back(std::move(p.a), std::move(p.b));
        }
        return out;
      },
      py::arg("trial"), py::arg("masses"), py::arg("config") = PipelineConfig{},
      "Filter, reconstruct forces, decimate, and window one trial");

  m.def(
      "analyze",
      [](const std::string& input_dir, const std::string& out_dir,
         const std::string& config_path, std::optional<uint64_t> seed) {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = read_pipeline_config(config_path);
        if (seed) cfg.seed = *seed;
        const std::string manifest = input_dir + "/session.manifest";
        const SessionManifest session = read_session_manifest(manifest);
        const std::vector<TrialRecord> trials = load_session(manifest);
        const AnalysisReport rep = run_analysis(trials, session.dyads, cfg);
        write_report(out_dir, rep, {});
        py::dict out;
        out["n_dyads"] = rep.dyads.size();
        out["n_failed"] = rep.n_failed;
        out["excluded_dyads"] = rep.excluded_dyads;
        out["f1_hz"] = rep.boundaries.f1_hz;
        out["f2_hz"] = rep.boundaries.f2_hz;
        out["seed"] = rep.seed;
        out["version"] = rep.version;
        py::dict stats;
        for (const StatsRow& row : rep.stats) {
          py::dict r;
          r["statistic"] = row.result.statistic;
          r["p_value"] = row.result.p_value;
          r["method"] = row.result.method;
          if (!row.route.empty()) r["route"] = row.route;
          stats[py::str(row.name)] = r;
        }
        out["stats"] = stats;
        return out;
      },
      py::arg("input_dir"), py::arg("out_dir"), py::arg("config_path") = std::string(),
      py::arg("seed") = py::none(),
      "Full pipeline over a recorded session directory; writes the report and "
      "returns a summary dict");

  m.def("simulate_session", &run_simulate, py::arg("config"), py::arg("n_trials"),
        py::arg("out_dir"),
        "Write a synthetic session (trial CSVs + manifest + ground truth)");

  m.def(
      "surrogate_threshold_dir",
      [](const std::string& input_dir, int n_perm, uint64_t seed,
         const std::string& config_path) {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = read_pipeline_config(config_path);
        return run_surrogate(input_dir, n_perm, seed, cfg);
      },
      py::arg("input_dir"), py::arg("n_perm") = 506, py::arg("seed") = 2024,
      py::arg("config_path") = std::string(),
      "Permutation threshold from the trials of a session directory");

  m.def("version", &tool_version);
}
