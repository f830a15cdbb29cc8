#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "circred/circular.hpp"
#include "circred/data.hpp"
#include "circred/harness.hpp"
#include "circred/inference.hpp"
#include "circred/joint_distribution.hpp"
#include "circred/passage.hpp"
#include "circred/special_functions.hpp"
#include "circred/vasicek.hpp"

namespace py = pybind11;
using namespace circred;

PYBIND11_MODULE(_circred, m) {
    m.doc() = "stochastic-correlation structural credit model";

    // special functions
    m.def("std_normal_cdf", &std_normal_cdf, py::arg("x"));
    m.def("std_normal_quantile", &std_normal_quantile, py::arg("p"));
    m.def("bivariate_normal_cdf", &bivariate_normal_cdf, py::arg("h"),
          py::arg("k"), py::arg("r"));
    m.def("bessel_i_scaled", &bessel_i_scaled, py::arg("nu"), py::arg("x"));

    // vasicek observation model
    m.def("vasicek_density", &vasicek_density, py::arg("x"), py::arg("p"),
          py::arg("rho"));
    m.def("vasicek_cdf", &vasicek_cdf, py::arg("x"), py::arg("p"),
          py::arg("rho"));
    m.def("vasicek_quantile", &vasicek_quantile, py::arg("u"), py::arg("p"),
          py::arg("rho"));

    // circular diffusions
    py::enum_<DiffusionKind>(m, "DiffusionKind")
        .value("CBM", DiffusionKind::CBM)
        .value("VonMises", DiffusionKind::VonMises);
    py::enum_<AngleMapping>(m, "AngleMapping")
        .value("Cosine", AngleMapping::Cosine)
        .value("CosineSquared", AngleMapping::CosineSquared);
    py::class_<CorrelationModel>(m, "CorrelationModel")
        .def(py::init<>())
        .def_readwrite("kind", &CorrelationModel::kind)
        .def_readwrite("sigma_theta", &CorrelationModel::sigma_theta)
        .def_readwrite("lambda_", &CorrelationModel::lambda)
        .def_readwrite("mu", &CorrelationModel::mu)
        .def_readwrite("mapping", &CorrelationModel::mapping);
    m.def("wrapped_normal_density",
          [](double theta, double theta0, double variance) {
              return wrapped_normal_density(theta, theta0, variance);
          },
          py::arg("theta"), py::arg("theta0"), py::arg("variance"));
    m.def("von_mises_transition_density",
          [](double theta, double theta0, const CorrelationModel& model,
             double dt) {
              return von_mises_transition_density(theta, theta0, model, dt);
          },
          py::arg("theta"), py::arg("theta0"), py::arg("model"), py::arg("dt"));
    m.def("von_mises_stationary_density", &von_mises_stationary_density,
          py::arg("theta"), py::arg("model"));
    m.def("angle_to_correlation", &angle_to_correlation, py::arg("theta"),
          py::arg("mapping"));
    m.def("sample_terminal_correlation",
          [](const CorrelationModel& model, double theta0, double T,
             int n_draws, std::uint64_t seed) {
              return sample_terminal_correlation(model, theta0, T, n_draws,
                                                 seed);
          },
          py::arg("model"), py::arg("theta0"), py::arg("T"), py::arg("n_draws"),
          py::arg("seed"));

    // joint terminal distribution
    py::class_<AssetParams>(m, "AssetParams")
        .def(py::init<>())
        .def_readwrite("mu", &AssetParams::mu)
        .def_readwrite("sigma", &AssetParams::sigma)
        .def_readwrite("s0", &AssetParams::s0)
        .def_readwrite("barriers", &AssetParams::barriers);
    m.def("conditional_joint_density", &conditional_joint_density,
          py::arg("s1"), py::arg("s2"), py::arg("rho"), py::arg("assets"),
          py::arg("t"));
    m.def("conditional_joint_cdf", &conditional_joint_cdf, py::arg("y1"),
          py::arg("y2"), py::arg("rho"), py::arg("assets"), py::arg("t"));
    m.def("joint_default_probability",
          [](double T, const AssetParams& assets,
             const std::vector<double>& rho_draws) {
              return joint_default_probability(T, assets, rho_draws);
          },
          py::arg("T"), py::arg("assets"), py::arg("rho_draws"));

    // passage quantities
    m.def("conditional_survival_probability",
          [](double t, double rho, const AssetParams& assets) {
              return conditional_survival_probability(t, rho, assets);
          },
          py::arg("t"), py::arg("rho"), py::arg("assets"));
    m.def("conditional_fpt_probability",
          [](double T1, double T2, double rho, const AssetParams& assets,
             int n1, int n2) {
              const auto r = conditional_fpt_probability(
                  T1, T2, rho, assets, TimeGrid2D::uniform(T1, T2, n1, n2));
              return py::make_tuple(r.value, r.error_estimate);
          },
          py::arg("T1"), py::arg("T2"), py::arg("rho"), py::arg("assets"),
          py::arg("n1") = 64, py::arg("n2") = 64);

    // inference
    py::class_<FitConfig>(m, "FitConfig")
        .def(py::init<>())
        .def_readwrite("eta", &FitConfig::eta)
        .def_readwrite("multistart", &FitConfig::multistart)
        .def_readwrite("max_iterations", &FitConfig::max_iterations)
        .def_readwrite("diffusion_kind", &FitConfig::diffusion_kind);
    py::class_<PsiParams>(m, "PsiParams")
        .def_readonly("lambda_", &PsiParams::lambda)
        .def_readonly("sigma", &PsiParams::sigma)
        .def_readonly("mu", &PsiParams::mu);
    py::class_<DependenceFit>(m, "DependenceFit")
        .def_readonly("rho_path", &DependenceFit::rho_path)
        .def_readonly("psi", &DependenceFit::psi)
        .def_readonly("objective_value", &DependenceFit::objective_value)
        .def_readonly("converged", &DependenceFit::converged)
        .def_readonly("at_bound_fraction", &DependenceFit::at_bound_fraction)
        .def_readonly("kappa", &DependenceFit::kappa);
    m.def("fit_dependence_path",
          [](const std::vector<double>& rates, const FitConfig& config) {
              return fit_dependence_path(VasicekObs::from_rates(rates), config);
          },
          py::arg("rates"), py::arg("config") = FitConfig{});
    py::class_<DDCalibration>(m, "DDCalibration")
        .def_readonly("dd", &DDCalibration::dd)
        .def_readonly("s0", &DDCalibration::s0)
        .def_readonly("b", &DDCalibration::b);
    m.def("calibrate_distance_to_default", &calibrate_distance_to_default,
          py::arg("p_bar"), py::arg("sigma"), py::arg("mu"), py::arg("T"));
    py::class_<ForecastResult>(m, "ForecastResult")
        .def_readonly("p_jd", &ForecastResult::p_jd)
        .def_readonly("p_jd_se", &ForecastResult::p_jd_se)
        .def_readonly("p_surv", &ForecastResult::p_surv)
        .def_readonly("p_surv_se", &ForecastResult::p_surv_se)
        .def_readonly("p_fpt", &ForecastResult::p_fpt)
        .def_readonly("p_fpt_se", &ForecastResult::p_fpt_se)
        .def_readonly("n_draws", &ForecastResult::n_draws);
    m.def("terminal_mixture_forecast", &terminal_mixture_forecast,
          py::arg("fit"), py::arg("calib"), py::arg("T"), py::arg("n_draws"),
          py::arg("seed"));

    // harness
    py::enum_<SweepParameter>(m, "SweepParameter")
        .value("GbmSigma", SweepParameter::GbmSigma)
        .value("VonSigma", SweepParameter::VonSigma)
        .value("VonLambda", SweepParameter::VonLambda);
    py::class_<SweepSpec>(m, "SweepSpec")
        .def(py::init<>())
        .def_readwrite("parameter", &SweepSpec::parameter)
        .def_readwrite("values", &SweepSpec::values)
        .def_readwrite("horizons", &SweepSpec::horizons)
        .def_readwrite("n_rho_draws", &SweepSpec::n_rho_draws)
        .def_readwrite("seed", &SweepSpec::seed);
    m.def("run_sweep", [](const SweepSpec& spec) {
        py::list out;
        for (const auto& r : run_sweep(spec)) {
            py::dict d;
            d["sweep_param"] = to_string(r.parameter);
            d["param_value"] = r.param_value;
            d["horizon_years"] = r.horizon_years;
            d["p_jd"] = r.p_jd;
            d["p_jd_se"] = r.p_jd_se;
            d["p_surv"] = r.p_surv;
            d["p_surv_se"] = r.p_surv_se;
            d["p_fpt"] = r.p_fpt;
            d["p_fpt_se"] = r.p_fpt_se;
            d["n_draws"] = r.n_draws;
            d["seed"] = r.seed;
            d["ok"] = r.ok;
            out.append(std::move(d));
        }
        return out;
    });

    // data ingestion
    py::class_<ChargeOffSeries>(m, "ChargeOffSeries")
        .def_readonly("category", &ChargeOffSeries::category)
        .def_readonly("rates", &ChargeOffSeries::rates)
        .def_readonly("floored_count", &ChargeOffSeries::floored_count)
        .def_readonly("percent_detected", &ChargeOffSeries::percent_detected);
    m.def("ingest_csv",
          [](const std::string& path) { return ingest_csv(path); },
          py::arg("path"));
}
