// Python bindings for the pcsft core. Matrices cross the boundary as numpy
// complex128 arrays (via pybind11/eigen.h); configs and reports as JSON text.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcsft/detect.hpp"
#include "pcsft/errors.hpp"
#include "pcsft/experiment.hpp"
#include "pcsft/fieldsim.hpp"
#include "pcsft/onticmap.hpp"
#include "pcsft/serialize.hpp"
#include "pcsft/superpos.hpp"

namespace py = pybind11;
using namespace pcsft;

namespace {

OrthonormalBasis basis_or_standard(const std::optional<CMatrix>& columns, int dim) {
  return columns ? OrthonormalBasis::from_columns(*columns) : OrthonormalBasis::standard(dim);
}

py::dict density_check_dict(const DensityCheck& c) {
  py::dict d;
  d["ok"] = c.ok;
  d["hermitian"] = c.hermitian;
  d["psd"] = c.psd;
  d["unit_trace"] = c.unit_trace;
  d["hermitian_defect"] = c.hermitian_defect;
  d["min_eigenvalue"] = c.min_eigenvalue;
  d["trace"] = c.trace;
  d["problems"] = c.describe();
  return d;
}

}  // namespace

PYBIND11_MODULE(_pcsft, m) {
  m.doc() = "Classical random fields, covariance operators, superposition and threshold detection";
  m.attr("__version__") = "0.1.0";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NotPsdError>(m, "NotPsdError", PyExc_ValueError);
  py::register_exception<ZeroFieldError>(m, "ZeroFieldError", PyExc_ValueError);
  py::register_exception<UndefinedG2Error>(m, "UndefinedG2Error", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  // --- linops ---------------------------------------------------------------
  py::class_<StateVector>(m, "StateVector")
      .def(py::init<CVector>(), py::arg("amplitudes"))
      .def_static("unit", &StateVector::unit, py::arg("dim"), py::arg("k"))
      .def_property_readonly("dim", &StateVector::dim)
      .def_property_readonly("amplitudes", &StateVector::amplitudes)
      .def("norm", &StateVector::norm)
      .def("normalized", &StateVector::normalized);

  py::class_<HermitianOperator>(m, "HermitianOperator")
      .def(py::init<CMatrix, double>(), py::arg("entries"), py::arg("tol_herm") = kTolHerm)
      .def_static("identity", &HermitianOperator::identity)
      .def_static("zero", &HermitianOperator::zero)
      .def_property_readonly("dim", &HermitianOperator::dim)
      .def_property_readonly("matrix", &HermitianOperator::matrix)
      .def("trace", &HermitianOperator::trace)
      .def("scaled", &HermitianOperator::scaled)
      .def("to_json", [](const HermitianOperator& op) { return to_json(op).dump(); })
      .def_static("from_json", [](const std::string& s) { return hermitian_from_json(Json::parse(s)); });

  py::class_<DensityState>(m, "DensityState")
      .def_static("from_operator", &DensityState::from_operator, py::arg("op"), py::arg("tol") = kTolHerm)
      .def_property_readonly("dim", &DensityState::dim)
      .def_property_readonly("matrix", &DensityState::matrix)
      .def_property_readonly("op", &DensityState::op);

  py::class_<OrthonormalBasis>(m, "OrthonormalBasis")
      .def_static("from_columns", &OrthonormalBasis::from_columns, py::arg("columns"), py::arg("tol") = 1e-9)
      .def_static("standard", &OrthonormalBasis::standard)
      .def_property_readonly("dim", &OrthonormalBasis::dim)
      .def_property_readonly("matrix", &OrthonormalBasis::matrix)
      .def("vector", &OrthonormalBasis::vector);

  m.def("make_projector", &make_projector, py::arg("psi"));
  m.def(
      "is_density", [](const CMatrix& op, double tol) { return density_check_dict(is_density(op, tol)); },
      py::arg("op"), py::arg("tol") = kTolHerm);
  m.def(
      "hermitian_eig",
      [](const CMatrix& op) {
        auto eig = hermitian_eig(op);
        return py::make_tuple(eig.values, eig.vectors);
      },
      py::arg("op"));
  m.def("psd_sqrt", &psd_sqrt, py::arg("op"), py::arg("tol_psd") = kTolPsd);
  m.def("frobenius_distance", &frobenius_distance);

  // --- fieldsim -------------------------------------------------------------
  py::class_<FieldSpec>(m, "FieldSpec")
      .def_static("gaussian", &FieldSpec::gaussian, py::arg("covariance"))
      .def_static("pure", &FieldSpec::pure, py::arg("psi"), py::arg("sigma2"))
      .def_static(
          "superposition",
          [](const CVector& c, double driver_sigma2, const std::optional<CMatrix>& basis) {
            return FieldSpec::superposition(
                SuperpositionSpec{c, driver_sigma2, basis_or_standard(basis, static_cast<int>(c.size()))});
          },
          py::arg("coefficients"), py::arg("driver_sigma2") = 1.0, py::arg("basis") = py::none())
      .def_static("decohered", &FieldSpec::decohered, py::arg("inner"), py::arg("gamma"))
      .def_property_readonly("dim", &FieldSpec::dim)
      .def_property_readonly("kind", &FieldSpec::kind_name)
      .def("analytic_covariance", &FieldSpec::analytic_covariance)
      .def("digest", [](const FieldSpec& s) { return spec_digest(s); })
      .def("to_json", [](const FieldSpec& s) { return to_json(s).dump(); });

  py::class_<FieldEnsemble>(m, "FieldEnsemble")
      .def_static("from_samples", &FieldEnsemble::from_samples, py::arg("samples"))
      .def_property_readonly("dim", &FieldEnsemble::dim)
      .def_property_readonly("size", &FieldEnsemble::size)
      .def_property_readonly("seed", &FieldEnsemble::seed)
      .def_property_readonly("samples", &FieldEnsemble::samples);

  py::class_<EnsembleStats>(m, "EnsembleStats")
      .def_readonly("mean", &EnsembleStats::mean)
      .def_readonly("covariance", &EnsembleStats::covariance)
      .def_readonly("dispersion", &EnsembleStats::dispersion);

  m.def("sample_field", &sample_field, py::arg("spec"), py::arg("n"), py::arg("seed"));
  m.def("sample_gaussian_field", &sample_gaussian_field, py::arg("covariance"), py::arg("n"), py::arg("seed"));
  m.def("sample_pure_field", &sample_pure_field, py::arg("psi"), py::arg("sigma2"), py::arg("n"), py::arg("seed"));
  m.def("ensemble_stats", &ensemble_stats);
  m.def("energy_along", &energy_along, py::arg("ensemble"), py::arg("direction"));
  m.def("total_energy", &total_energy);
  m.def(
      "energy_density", [](const CVector& phi, double dx) { return energy_density(phi, dx).density; },
      py::arg("phi"), py::arg("dx"));

  // --- onticmap -------------------------------------------------------------
  py::class_<EpistemicImage>(m, "EpistemicImage")
      .def_readonly("rho", &EpistemicImage::rho)
      .def_readonly("sigma2", &EpistemicImage::sigma2);
  m.def("to_epistemic", &to_epistemic, py::arg("covariance"), py::arg("tol") = kTolTrace);
  m.def("from_epistemic", &from_epistemic, py::arg("rho"), py::arg("sigma2"));
  m.def("born_probabilities", &born_probabilities, py::arg("rho"), py::arg("basis"), py::arg("tol") = 1e-9);
  m.def("equivalent", &equivalent, py::arg("b1"), py::arg("b2"), py::arg("tol") = 1e-9);

  // --- superpos -------------------------------------------------------------
  py::class_<ComponentSignals>(m, "ComponentSignals")
      .def_readonly("basis", &ComponentSignals::basis)
      .def_readonly("xi", &ComponentSignals::xi)
      .def("reconstruct", &ComponentSignals::reconstruct);
  py::class_<CorrelationMatrix>(m, "CorrelationMatrix")
      .def_readonly("values", &CorrelationMatrix::values)
      .def("is_defined", &CorrelationMatrix::is_defined);
  py::class_<RankOneResult>(m, "RankOneResult")
      .def_readonly("is_rank_one", &RankOneResult::is_rank_one)
      .def_readonly("psi_hat", &RankOneResult::psi_hat)
      .def_readonly("lambda1", &RankOneResult::lambda1)
      .def_readonly("ratio", &RankOneResult::ratio);
  py::enum_<Coupling>(m, "Coupling")
      .value("independent", Coupling::independent)
      .value("common_driver", Coupling::common_driver);

  m.def(
      "superpose_max_correlated",
      [](const CVector& c, double driver_sigma2, std::size_t n, std::uint64_t seed, const std::optional<CMatrix>& basis) {
        auto draw = superpose_max_correlated(
            SuperpositionSpec{c, driver_sigma2, basis_or_standard(basis, static_cast<int>(c.size()))}, n, seed);
        return py::make_tuple(draw.ensemble, draw.signals);
      },
      py::arg("coefficients"), py::arg("driver_sigma2"), py::arg("n"), py::arg("seed"), py::arg("basis") = py::none());
  m.def("correlation_matrix", &correlation_matrix);
  m.def("rank_one_check", &rank_one_check, py::arg("covariance"), py::arg("tol") = kRankOneTolSampled);
  m.def("decohere", &decohere, py::arg("signals"), py::arg("gamma"), py::arg("seed"));
  m.def("superpose_fields", &superpose_fields, py::arg("a"), py::arg("b"), py::arg("coupling"), py::arg("n"),
        py::arg("seed"));

  // --- detect ---------------------------------------------------------------
  py::class_<DetectorConfig>(m, "DetectorConfig")
      .def(py::init([](const OrthonormalBasis& basis, double threshold, double kappa, std::size_t max_steps, double dt) {
             DetectorConfig cfg{basis, threshold, kappa, max_steps, dt};
             cfg.validate();
             return cfg;
           }),
           py::arg("basis"), py::arg("threshold"), py::arg("background_kappa") = 0.0, py::arg("max_steps") = 100000,
           py::arg("dt") = 1.0)
      .def_readonly("threshold", &DetectorConfig::threshold)
      .def_readonly("background_kappa", &DetectorConfig::background_kappa);
  py::class_<DetectionStats>(m, "DetectionStats")
      .def_readonly("trials", &DetectionStats::trials)
      .def_readonly("clicks_per_channel", &DetectionStats::clicks_per_channel)
      .def_readonly("coincidences", &DetectionStats::coincidences)
      .def_readonly("no_click_trials", &DetectionStats::no_click_trials)
      .def("frequencies", &DetectionStats::frequencies)
      .def("coincidence_fraction", &DetectionStats::coincidence_fraction)
      .def("partition_holds", &DetectionStats::partition_holds)
      .def("to_json", [](const DetectionStats& s) { return to_json(s).dump(); });

  m.def("ensemble_detection_probs", &ensemble_detection_probs);
  m.def("mean_step_channel_energy", &mean_step_channel_energy);
  m.def("run_threshold_trials", &run_threshold_trials, py::arg("spec"), py::arg("cfg"), py::arg("n_trials"),
        py::arg("seed"));
  m.def("g2_zero", &g2_zero, py::arg("stats"), py::arg("k"), py::arg("m"));

  // --- experiments ----------------------------------------------------------
  m.def(
      "default_config",
      [](const std::string& name) { return config_to_json(default_config(experiment_kind_from_string(name))).dump(2); },
      py::arg("experiment"));
  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = parse_config_text(config_json);
        Report report;
        {
          py::gil_scoped_release release;
          report = run_experiment(cfg);
        }
        return report.to_json().dump();
      },
      py::arg("config_json"), "Runs an experiment from its JSON config and returns the report as JSON text.");
  m.def("set_worker_count", &set_worker_count);
  m.def("worker_count", &worker_count);
}
