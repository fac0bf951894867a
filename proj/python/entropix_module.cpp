// pybind11 bindings exposing the main operations: chain presets, the confined
// finite-time functionals, the Fock oracle, scattering data, and the
// large-time (scattering-formula) functionals.
#include "entropix/asymptotics.hpp"
#include "entropix/confined.hpp"
#include "entropix/errors.hpp"
#include "entropix/fock.hpp"
#include "entropix/runner.hpp"
#include "entropix/scattering.hpp"
#include "entropix/version.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

namespace py = pybind11;
using namespace entropix;

namespace {

double parse_p(py::object p) {
    if (py::isinstance<py::str>(p)) {
        const auto s = p.cast<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        throw ConfigError("p: unknown string value '" + s + "'");
    }
    return p.cast<double>();
}

} // namespace

PYBIND11_MODULE(entropix, m) {
    m.doc() = "entropic fluctuations of open XY spin chains";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CapError>(m, "CapError", PyExc_RuntimeError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

    py::class_<Interval>(m, "Interval")
        .def(py::init<int, int>(), py::arg("lo"), py::arg("hi"))
        .def_static("symmetric", &Interval::symmetric, py::arg("M"))
        .def_readonly("lo", &Interval::lo)
        .def_readonly("hi", &Interval::hi)
        .def_property_readonly("n_sites", &Interval::size)
        .def("__repr__", [](const Interval& iv) {
            return "Interval(" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + ")";
        });

    py::class_<ChainSpec>(m, "ChainSpec")
        .def_static("constant", &ChainSpec::constant, py::arg("J"), py::arg("lam"),
                    py::arg("beta_l"), py::arg("beta_r"))
        .def_static("step_J", &ChainSpec::step_J, py::arg("J_left"), py::arg("J_right"),
                    py::arg("lam"), py::arg("beta_l"), py::arg("beta_r"))
        .def_static("periodic2", &ChainSpec::periodic2, py::arg("J1"), py::arg("J2"),
                    py::arg("lam1"), py::arg("lam2"), py::arg("beta_l"), py::arg("beta_r"))
        .def_static(
            "from_json",
            [](const std::string& text) { return ChainSpec::from_json(nlohmann::json::parse(text)); },
            py::arg("text"))
        .def("to_json", [](const ChainSpec& s) { return s.to_json().dump(); })
        .def_readonly("beta_l", &ChainSpec::beta_l)
        .def_readonly("beta_r", &ChainSpec::beta_r)
        .def("J", &ChainSpec::J, py::arg("x"))
        .def("lam", &ChainSpec::lambda, py::arg("x"));

    m.def(
        "restrict",
        [](const ChainSpec& spec, const Interval& iv) {
            const auto c = restrict_chain(spec, iv);
            return py::make_tuple(c.J, c.lambda);
        },
        py::arg("spec"), py::arg("interval"), "coefficient arrays (J bonds, lambda sites)");

    py::class_<ConfinedSystem>(m, "ConfinedSystem")
        .def_property_readonly("dim", &ConfinedSystem::dim)
        .def_readonly("J0", &ConfinedSystem::J0)
        .def_property_readonly("h", [](const ConfinedSystem& s) { return s.h; })
        .def_property_readonly("k", [](const ConfinedSystem& s) { return s.k; })
        .def("es_t", &es_t, py::arg("alpha"), py::arg("t"))
        .def(
            "ep_t",
            [](const ConfinedSystem& s, py::object p, double alpha, double t) {
                return ep_t(s, parse_p(p), alpha, t);
            },
            py::arg("p"), py::arg("alpha"), py::arg("t"))
        .def("einf_t", &einf_t, py::arg("alpha"), py::arg("t"))
        .def("fcs_char", &fcs_char, py::arg("alpha"), py::arg("t"))
        .def("gc_t", &gc_t, py::arg("alpha"), py::arg("t"), py::arg("s"))
        .def("mean_ep_rate", &mean_ep_rate, py::arg("t"))
        .def(
            "es_derivative_trace",
            [](const ConfinedSystem& s, double alpha, double t) {
                return es_derivative_trace(s, alpha, t).value;
            },
            py::arg("alpha"), py::arg("t"))
        .def("time_averaged_flux_l", &time_averaged_flux_l, py::arg("t0"), py::arg("t1"));

    m.def("assemble", &assemble, py::arg("spec"), py::arg("interval"));

    // ---- Fock oracle ----
    auto fock_m = m.def_submodule("fock", "brute-force 2^N many-body oracle");
    fock_m.def("oracle_es", &fock::oracle_es);
    fock_m.def("oracle_ep", [](const ChainSpec& spec, const Interval& iv, py::object p,
                               double alpha, double t) {
        return fock::oracle_ep(spec, iv, parse_p(p), alpha, t);
    });
    fock_m.def("oracle_einf", &fock::oracle_einf);
    fock_m.def("oracle_fcs_char", &fock::oracle_fcs_char);
    fock_m.def("oracle_gc", &fock::oracle_gc);
    fock_m.def("oracle_mean_ep_rate", &fock::oracle_mean_ep_rate);
    fock_m.def("fcs_distribution", [](const ChainSpec& spec, const Interval& iv, double t) {
        return fock::fcs_distribution(spec, iv, t).atoms;
    });
    fock_m.def(
        "sigma_spectral_measure",
        [](const ChainSpec& spec, const Interval& iv, double t, bool relaxed, double s) {
            return fock::sigma_spectral_measure(spec, iv, t, {relaxed, s}).atoms;
        },
        py::arg("spec"), py::arg("interval"), py::arg("t"), py::arg("relaxed") = false,
        py::arg("s") = 0.0);
    fock_m.def("density_matrix", &fock::density_matrix);
    fock_m.def("relative_entropy", &fock::relative_entropy);

    // ---- scattering ----
    auto sc = m.def_submodule("scattering", "Weyl m-functions and the on-shell s-matrix");
    py::class_<scattering::SupportSet>(sc, "SupportSet")
        .def_readonly("intervals", &scattering::SupportSet::intervals)
        .def_readonly("epsilon", &scattering::SupportSet::epsilon)
        .def("contains", &scattering::SupportSet::contains, py::arg("E"), py::arg("margin") = 0.0)
        .def("total_measure", &scattering::SupportSet::total_measure);
    sc.def(
        "weyl_m",
        [](const std::string& side, Complex z, const ChainSpec& spec) {
            return scattering::weyl_m(
                side == "l" ? scattering::Side::Left : scattering::Side::Right, z, spec);
        },
        py::arg("side"), py::arg("z"), py::arg("spec"));
    sc.def("essential_support",
           [](const ChainSpec& spec) { return scattering::essential_support(spec); });
    sc.def(
        "scattering_point",
        [](double E, const ChainSpec& spec) {
            const auto pt = scattering::scattering_point(E, spec);
            py::dict d;
            d["E"] = pt.E;
            d["G_l"] = pt.G_l;
            d["G_r"] = pt.G_r;
            d["F_l"] = pt.F_l;
            d["F_r"] = pt.F_r;
            d["s"] = pt.s;
            d["in_support"] = pt.in_support;
            return d;
        },
        py::arg("E"), py::arg("spec"));
    sc.def(
        "reflectionless_test",
        [](const ChainSpec& spec, double eps) {
            const auto res = scattering::reflectionless_test(spec, eps);
            const char* verdict =
                res.verdict == scattering::ReflectionlessVerdict::Reflectionless
                    ? "reflectionless"
                    : (res.verdict == scattering::ReflectionlessVerdict::NotReflectionless
                           ? "not_reflectionless"
                           : "no_transport");
            return py::make_tuple(verdict, res.max_deviation);
        },
        py::arg("spec"), py::arg("eps") = 1e-8);

    // ---- large-time functionals ----
    auto as = m.def_submodule("asymptotics", "large-time entropic functionals");
    py::class_<asymptotics::Model>(as, "Model");
    as.def("make_model", &asymptotics::make_model, py::arg("spec"));
    as.def(
        "e_plus",
        [](double alpha, const asymptotics::Model& mdl) { return asymptotics::e_plus(alpha, mdl); },
        py::arg("alpha"), py::arg("model"));
    as.def(
        "e_p_plus",
        [](double alpha, py::object p, const asymptotics::Model& mdl) {
            return asymptotics::e_p_plus(alpha, parse_p(p), mdl);
        },
        py::arg("alpha"), py::arg("p"), py::arg("model"));
    as.def(
        "e_plus_reflectionless",
        [](double alpha, const asymptotics::Model& mdl) {
            return asymptotics::e_plus_reflectionless(alpha, mdl);
        },
        py::arg("alpha"), py::arg("model"));
    as.def(
        "landauer_flux",
        [](const asymptotics::Model& mdl) {
            const auto f = asymptotics::landauer_flux(mdl);
            py::dict d;
            d["phi_l"] = f.phi_l;
            d["phi_r"] = f.phi_r;
            d["sigma"] = f.sigma;
            return d;
        },
        py::arg("model"));
    as.def(
        "clt_variance",
        [](const asymptotics::Model& mdl) { return asymptotics::clt_variance(mdl); },
        py::arg("model"));
    as.def(
        "rate_function",
        [](const std::string& kind, double theta, const asymptotics::Model& mdl) {
            return asymptotics::rate_function(kind == "FCS" ? asymptotics::RateKind::FCS
                                                            : asymptotics::RateKind::ES_GC,
                                              theta, mdl);
        },
        py::arg("kind"), py::arg("theta"), py::arg("model"));
    as.def(
        "entropic_identity_report",
        [](const asymptotics::Model& mdl) {
            const auto rep = asymptotics::entropic_identity_report(mdl);
            py::dict d;
            d["e_plus_at_one"] = rep.e_plus_at_one;
            d["ep_spread_at_half"] = rep.ep_spread_at_half;
            d["reflectionless"] = rep.reflectionless.verdict ==
                                  scattering::ReflectionlessVerdict::Reflectionless;
            d["transport"] = rep.transport;
            d["verdict"] = rep.verdict;
            return d;
        },
        py::arg("model"));

    // ---- runner ----
    m.def(
        "run_config",
        [](const std::string& config_text, const std::string& out_dir) {
            runner::RunConfig config =
                runner::parse_config(nlohmann::json::parse(config_text));
            if (!out_dir.empty()) config.out_dir = out_dir;
            const auto outcome = runner::run(config);
            py::dict d;
            d["verification_passed"] = outcome.verification_passed;
            d["written_files"] = outcome.written_files;
            d["csv"] = outcome.table.to_csv();
            return d;
        },
        py::arg("config_text"), py::arg("out_dir") = "",
        "execute a schema-v1 run configuration and persist its outputs");
}
