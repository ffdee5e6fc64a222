// Python bindings for the main operations: thresholds, spectral fields and
// norms, the per-mode propagator, flows and the capillary commutator.
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "nklab/errors.hpp"
#include "nklab/lagrangian.hpp"
#include "nklab/littlewood_paley.hpp"
#include "nklab/params.hpp"
#include "nklab/propagator.hpp"
#include "nklab/spectral.hpp"

namespace py = pybind11;
using namespace nklab;

namespace {

SpectralField field_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a,
                               double length) {
    const auto buf = a.request();
    PeriodicGrid g;
    g.length = length;
    if (buf.ndim == 1) {
        g.dim = 1;
        g.n = int(buf.shape[0]);
    } else if (buf.ndim == 2) {
        if (buf.shape[0] != buf.shape[1])
            throw UsageError("field_from_samples: 2D samples must be square");
        g.dim = 2;
        g.n = int(buf.shape[0]);
    } else {
        throw UsageError("field_from_samples: 1D or 2D array expected");
    }
    g.validate();
    return SpectralField::from_samples(
        g, std::span<const double>(static_cast<const double*>(buf.ptr), g.size()), 1);
}

py::array field_to_array(const SpectralField& f) {
    const auto s = f.to_samples();
    if (f.grid().dim == 1) {
        py::array_t<double> out(std::vector<py::ssize_t>{f.grid().n});
        std::copy(s.begin(), s.begin() + f.grid().n, out.mutable_data());
        return out;
    }
    py::array_t<double> out(std::vector<py::ssize_t>{f.grid().n, f.grid().n});
    std::copy(s.begin(), s.begin() + py::ssize_t(f.grid().size()), out.mutable_data());
    return out;
}

HybridForm form_of(const std::string& name) {
    if (name == "index") return HybridForm::index;
    if (name == "multiplier") return HybridForm::multiplier;
    if (name == "minform") return HybridForm::minform;
    if (name == "fdform") return HybridForm::fdform;
    throw UsageError("hybrid form must be index|multiplier|minform|fdform");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "spectral laboratory for the nonlocal Korteweg system";

    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def(py::init([](double mu, double lambda, double kappa, double p, double epsilon) {
                 PhysicalParams P{mu, lambda, kappa, p, epsilon};
                 P.validate();
                 return P;
             }),
             py::arg("mu") = 1.0, py::arg("lambda_") = 0.0, py::arg("kappa") = 1.0,
             py::arg("p") = 1.0, py::arg("epsilon") = 1.0)
        .def_readwrite("mu", &PhysicalParams::mu)
        .def_readwrite("lambda_", &PhysicalParams::lambda)
        .def_readwrite("kappa", &PhysicalParams::kappa)
        .def_readwrite("p", &PhysicalParams::p)
        .def_readwrite("epsilon", &PhysicalParams::epsilon)
        .def_property_readonly("nu", &PhysicalParams::nu)
        .def_property_readonly("nu0", &PhysicalParams::nu0)
        .def_property_readonly("ratio_M", &PhysicalParams::ratio_M);

    m.def("h_decay", &h_decay, py::arg("x"));
    m.def("g_eps", &g_eps, py::arg("x"), py::arg("params"));
    m.def("threshold_x", &threshold_x, py::arg("params"), py::arg("tol") = 1e-12);
    m.def("threshold_y", &threshold_y, py::arg("params"), py::arg("tol") = 1e-12);
    m.def("gamma_pair", [](double M) { return gamma_pair(M); }, py::arg("M"));
    m.def("root_a", &root_a, py::arg("M"), py::arg("tol") = 1e-12);
    m.def("threshold_asymptote", &threshold_asymptote, py::arg("params"));
    m.def("medium_regime_m", &medium_regime_m, py::arg("M"));
    m.def("bracket_chain_holds", &bracket_chain_holds, py::arg("params"), py::arg("tol") = 1e-12);
    m.def(
        "threshold_report",
        [](const PhysicalParams& P) {
            const auto r = threshold_report(P);
            py::dict d;
            d["x_eps"] = r.x_eps;
            d["y_eps"] = r.y_eps;
            d["gamma1"] = r.gamma1;
            d["gamma2"] = r.gamma2;
            d["m"] = r.m;
            d["a_M"] = r.a_M ? py::object(py::float_(*r.a_M)) : py::none();
            d["asymptote"] = r.asymptote;
            return d;
        },
        py::arg("params"));

    py::class_<SpectralField>(m, "Field")
        .def_property_readonly("dim", [](const SpectralField& f) { return f.grid().dim; })
        .def_property_readonly("n", [](const SpectralField& f) { return f.grid().n; })
        .def_property_readonly("length", [](const SpectralField& f) { return f.grid().length; })
        .def("to_samples", &field_to_array)
        .def("l2", &SpectralField::l2)
        .def("linf", &SpectralField::linf)
        .def("zero_mean", &SpectralField::zero_mean);

    m.def("field_from_samples", &field_from_array, py::arg("samples"),
          py::arg("length") = 6.283185307179586);
    m.def(
        "random_field",
        [](int dim, int n, double length, int kmax, std::uint64_t seed, double amplitude) {
            PeriodicGrid g{dim, n, length};
            g.validate();
            return random_band_limited(g, 1, kmax, seed, amplitude);
        },
        py::arg("dim") = 1, py::arg("n") = 256, py::arg("length") = 6.283185307179586,
        py::arg("kmax") = 32, py::arg("seed") = 0, py::arg("amplitude") = 1.0);

    m.def("capillary_op", &capillary_op, py::arg("field"), py::arg("eps"));
    m.def("capillary_symbol", &capillary_symbol, py::arg("xi2"), py::arg("eps"));
    m.def("besov_norm", &besov_norm, py::arg("field"), py::arg("s"), py::arg("p") = 2.0,
          py::arg("r") = 1.0);
    m.def(
        "hybrid_norm",
        [](const SpectralField& f, double s, double eps, const std::string& form, double gamma) {
            return hybrid_norm(f, s, eps, form_of(form), gamma);
        },
        py::arg("field"), py::arg("s"), py::arg("eps"), py::arg("form") = "minform",
        py::arg("gamma") = 1.0);
    m.def("tilde_norm", &tilde_norm, py::arg("field"), py::arg("alpha"), py::arg("s"),
          py::arg("r"));

    py::class_<ModeSymbol>(m, "ModeSymbol")
        .def_readonly("xi", &ModeSymbol::xi)
        .def_readonly("b", &ModeSymbol::b)
        .def_readonly("g", &ModeSymbol::g)
        .def_readonly("discriminant", &ModeSymbol::discriminant)
        .def_readonly("S", &ModeSymbol::S)
        .def_readonly("R", &ModeSymbol::R)
        .def_readonly("lambda_plus", &ModeSymbol::lambda_plus)
        .def_readonly("lambda_minus", &ModeSymbol::lambda_minus)
        .def_property_readonly("regime", [](const ModeSymbol& s) {
            switch (s.regime) {
                case Regime::oscillatory: return "oscillatory";
                case Regime::degenerate: return "degenerate";
                default: return "real";
            }
        });

    m.def(
        "mode_symbol",
        [](double xi, const PhysicalParams& P, const std::string& kind) {
            return mode_symbol(xi, P,
                               kind == "local" ? CapillaryKind::local : CapillaryKind::nonlocal);
        },
        py::arg("xi"), py::arg("params"), py::arg("kind") = "nonlocal");
    m.def(
        "propagator_matrix",
        [](const ModeSymbol& sym, double t) {
            const auto M = propagator_matrix(sym, t);
            py::array_t<double> out(std::vector<py::ssize_t>{2, 2});
            auto r = out.mutable_unchecked<2>();
            r(0, 0) = M.q_q;
            r(0, 1) = M.q_v;
            r(1, 0) = M.v_q;
            r(1, 1) = M.v_v;
            return out;
        },
        py::arg("symbol"), py::arg("t"));
    m.def(
        "evolve_mode",
        [](std::complex<double> q0, std::complex<double> v0, const ModeSymbol& sym, double t) {
            const auto s = evolve_mode(ModeState{q0, v0, {}}, sym, t);
            return py::make_tuple(s.q, s.v);
        },
        py::arg("q0"), py::arg("v0"), py::arg("symbol"), py::arg("t"));
    m.def("velocity_identity_residual", &velocity_identity_residual, py::arg("symbol"));

    py::class_<FlowMap>(m, "Flow")
        .def_readonly("t", &FlowMap::t)
        .def_readonly("V", &FlowMap::V)
        .def_property_readonly("jacobian_gap", [](const FlowMap& flow) {
            const auto dets = jacobian_det(flow);
            double gap = 0.0;
            for (std::size_t i = 0; i < dets.finite_difference.size(); ++i) {
                if (std::isnan(dets.finite_difference[i])) continue;
                gap = std::max(gap,
                               std::abs(dets.finite_difference[i] - dets.divergence_formula[i]));
            }
            return gap;
        });

    m.def(
        "shear_flow",
        [](int n, double length, double amplitude, double t, int substeps) {
            PeriodicGrid g{1, n, length};
            g.validate();
            return integrate_flow(AdvectingVelocity::sinusoidal_shear(g, amplitude), g, t,
                                  substeps);
        },
        py::arg("n") = 256, py::arg("length") = 6.283185307179586, py::arg("amplitude") = 0.5,
        py::arg("t") = 0.1, py::arg("substeps") = 32);
    m.def(
        "translation_flow",
        [](int n, double length, double shift) {
            PeriodicGrid g{1, n, length};
            g.validate();
            return integrate_flow(AdvectingVelocity::constant(1, {shift, 0.0}), g, 1.0, 1);
        },
        py::arg("n") = 256, py::arg("length") = 6.283185307179586, py::arg("shift") = 0.5);
    m.def("compose", &compose, py::arg("field"), py::arg("flow"), py::arg("inverse") = false);
    m.def("capillary_commutator", &capillary_commutator, py::arg("field"), py::arg("j"),
          py::arg("flow"), py::arg("eps"));
}
