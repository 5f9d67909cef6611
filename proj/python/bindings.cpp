#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "besovtree/brute_force.hpp"
#include "besovtree/errors.hpp"
#include "besovtree/map_prune.hpp"
#include "besovtree/quality.hpp"
#include "besovtree/restore.hpp"
#include "besovtree/tree_prior.hpp"

namespace py = pybind11;
using namespace besovtree;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DyadicSignal to_signal(const Array& a) {
    const auto buf = a.request();
    const auto* data = static_cast<const double*>(buf.ptr);
    if (buf.ndim == 1) return DyadicSignal::from_1d(std::vector<double>(data, data + buf.shape[0]));
    if (buf.ndim == 2) {
        if (buf.shape[0] != buf.shape[1]) throw DimensionError("2D input must be square");
        return DyadicSignal::from_2d(static_cast<std::size_t>(buf.shape[0]),
                                     std::vector<double>(data, data + buf.shape[0] * buf.shape[1]));
    }
    throw DimensionError("expected a 1D or 2D array");
}

Array to_array(const DyadicSignal& s) {
    if (s.dim == 1) {
        Array out(static_cast<py::ssize_t>(s.values.size()));
        std::copy(s.values.begin(), s.values.end(), out.mutable_data());
        return out;
    }
    const auto side = static_cast<py::ssize_t>(s.side());
    Array out({side, side});
    std::copy(s.values.begin(), s.values.end(), out.mutable_data());
    return out;
}

std::vector<std::vector<int>> mask_bits(const TreeMask& mask) {
    std::vector<std::vector<int>> out;
    for (const auto& level : mask.levels()) out.emplace_back(level.begin(), level.end());
    return out;
}

BaseDensity density_from(const std::string& prior, double kappa) { return BaseDensity{parse_base_kind(prior), kappa}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "MAP estimation under random tree Besov priors";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<Pyramid>(m, "Pyramid")
        .def_readonly("dim", &Pyramid::dim)
        .def_readonly("depth", &Pyramid::depth)
        .def_readwrite("scaling", &Pyramid::scaling)
        .def_readwrite("details", &Pyramid::details)
        .def_property_readonly("wavelet", [](const Pyramid& p) { return std::string(to_string(p.family)); })
        .def("energy", &pyramid_energy)
        .def("__repr__", [](const Pyramid& p) {
            return "<Pyramid dim=" + std::to_string(p.dim) + " J=" + std::to_string(p.depth) + " " +
                   std::string(to_string(p.family)) + ">";
        });

    py::class_<PruneResult>(m, "PruneResult")
        .def_property_readonly("mask", [](const PruneResult& r) { return mask_bits(r.mask); })
        .def_property_readonly("raw_mask", [](const PruneResult& r) { return mask_bits(r.raw_mask); })
        .def_property_readonly("kept_nodes", [](const PruneResult& r) { return r.mask.count(); })
        .def_readonly("coefficients", &PruneResult::coefficients)
        .def_readonly("beta_hat", &PruneResult::beta_hat)
        .def_readonly("level_log_odds", &PruneResult::level_log_odds)
        .def_readonly("total_cost", &PruneResult::total_cost);

    m.def(
        "forward_dwt",
        [](const Array& x, const std::string& wavelet) {
            return forward_dwt(to_signal(x), WaveletBasis::make(parse_wavelet_family(wavelet)));
        },
        py::arg("x"), py::arg("wavelet") = "haar", "Full-depth periodic orthonormal DWT of a dyadic 1D or square 2D array.");
    m.def(
        "inverse_dwt", [](const Pyramid& p) { return to_array(inverse_dwt(p)); }, py::arg("pyramid"));

    m.def(
        "prune_fixed_beta",
        [](const Pyramid& p, double beta, const std::string& prior, double kappa, double noise_sigma) {
            return prune_fixed_beta(p, BetaSchedule::uniform(beta), density_from(prior, kappa), noise_sigma);
        },
        py::arg("pyramid"), py::arg("beta"), py::arg("prior") = "gaussian", py::arg("kappa") = 1.0,
        py::arg("noise_sigma") = 1.0);
    m.def(
        "auto_prune_gaussian", [](const Pyramid& p, double a) { return auto_prune_gaussian(p, Hyperprior{a}); },
        py::arg("pyramid"), py::arg("a") = 100.0);
    m.def(
        "auto_prune_laplace",
        [](const Pyramid& p, double a, double kappa) { return auto_prune_laplace(p, Hyperprior{a}, kappa); },
        py::arg("pyramid"), py::arg("a") = 10.0, py::arg("kappa") = 1.0);
    m.def(
        "brute_force_map",
        [](const Pyramid& p, std::optional<double> beta, double a, const std::string& prior, double kappa) {
            const BaseDensity d = density_from(prior, kappa);
            return beta ? oracle::brute_force_map(p, d, BetaSchedule::uniform(*beta))
                        : oracle::brute_force_map(p, d, Hyperprior{a});
        },
        py::arg("pyramid"), py::arg("beta") = py::none(), py::arg("a") = 0.0, py::arg("prior") = "gaussian",
        py::arg("kappa") = 1.0, "Exhaustive reference solver for small trees.");
    m.def("rescale_beta", &rescale_beta, py::arg("beta"), py::arg("exponent"));
    m.def("reduce_to_unit", &reduce_to_unit, py::arg("beta"), py::arg("sigma"), py::arg("kappa"));

    m.def(
        "denoise",
        [](const Array& x, std::optional<double> beta, double a, const std::string& prior, double kappa,
           const std::string& wavelet, double scale, const std::string& noise) {
            DenoiseConfig c = beta ? DenoiseConfig::fixed(*beta, density_from(prior, kappa))
                                   : DenoiseConfig::automatic(a, density_from(prior, kappa));
            c.wavelet = parse_wavelet_family(wavelet);
            c.scale = scale;
            if (noise == "estimate") {
                c.noise = NoiseMode::Estimate;
            } else if (noise != "unit") {
                throw ParameterError("noise must be 'unit' or 'estimate'");
            }
            DenoiseOutput out = denoise(to_signal(x), c);
            return py::make_tuple(to_array(out.signal), out.prune);
        },
        py::arg("x"), py::arg("beta") = py::none(), py::arg("a") = 100.0, py::arg("prior") = "gaussian",
        py::arg("kappa") = 1.0, py::arg("wavelet") = "haar", py::arg("scale") = 1.0, py::arg("noise") = "unit",
        "Denoise with fixed beta when `beta` is given, otherwise with automatic levelwise beta.");

    m.def(
        "pnp_deconvolve",
        [](const Array& y, const std::vector<double>& kernel, std::optional<double> tau, int iters, double tol,
           double a) {
            PnPConfig c;
            c.tau = tau;
            c.iterations = iters;
            c.tolerance = tol;
            c.denoiser = DenoiseConfig::automatic(a);
            PnPResult r = pnp_deconvolve(to_signal(y), ConvOp{kernel}, c);
            return py::make_tuple(to_array(r.signal), r.iterations);
        },
        py::arg("y"), py::arg("kernel"), py::arg("tau") = py::none(), py::arg("iters") = 50, py::arg("tol") = 1e-4,
        py::arg("a") = 100.0);
    m.def(
        "convolve", [](const Array& x, const std::vector<double>& k) { return to_array(convolve(to_signal(x), ConvOp{k})); },
        py::arg("x"), py::arg("kernel"));

    m.def(
        "sample_besov",
        [](int dim, int depth, double s, double p, double kappa, std::vector<double> beta, const std::string& wavelet,
           std::uint64_t seed) {
            PriorConfig c;
            c.dim = dim;
            c.depth = depth;
            c.s = s;
            c.p = p;
            c.kappa = kappa;
            c.beta = std::move(beta);
            PriorDraw d = sample_besov(c, WaveletBasis::make(parse_wavelet_family(wavelet)), RandomSeed{seed, 0});
            return py::make_tuple(to_array(d.signal), mask_bits(d.mask), d.pyramid);
        },
        py::arg("dim") = 1, py::arg("depth") = 9, py::arg("s") = 1.0, py::arg("p") = 2.0, py::arg("kappa") = 1.0,
        py::arg("beta") = std::vector<double>{0.5}, py::arg("wavelet") = "db2", py::arg("seed") = 0);
    m.def("besov_norm", &besov_norm, py::arg("pyramid"), py::arg("s"), py::arg("p"));

    m.def(
        "rel_error", [](const Array& e, const Array& r) { return rel_error(to_signal(e), to_signal(r)); }, py::arg("est"),
        py::arg("ref"));
    m.def(
        "snr_db", [](const Array& e, const Array& r) { return snr_db(to_signal(e), to_signal(r)); }, py::arg("est"),
        py::arg("ref"));
    m.def(
        "ssim", [](const Array& e, const Array& r) { return ssim(to_signal(e), to_signal(r)); }, py::arg("est"),
        py::arg("ref"));

    m.def(
        "blocks_signal", [](int depth) { return to_array(blocks_signal(depth)); }, py::arg("depth") = 12);
    m.def(
        "synthetic_image", [](int depth) { return to_array(synthetic_image(depth)); }, py::arg("depth") = 7);
    m.def(
        "add_gaussian_noise",
        [](const Array& x, double sigma, std::uint64_t seed) { return to_array(add_gaussian_noise(to_signal(x), sigma, seed)); },
        py::arg("x"), py::arg("sigma"), py::arg("seed") = 0);
}
