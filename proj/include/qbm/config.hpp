// config.hpp: run configuration: INI parsing, validation, serialization
//
// [environment] n, gamma0, cutoff, temperature = zero|finite|high|mimic,
//               beta, kT, mass_ref
// [system]      mass, omega
// [initial]     kind = gaussian|superposition, x0, p0, L0, sigma
// [run]         engine = moments|grid|fokker_planck, t_end, dt, samples,
//               outputs, allow_long, counterterm, renormalized_frequency,
//               bare_energy, record_every, activation_gap
// [grid]        n, l_box (0: automatic)
// [fp]          nx, np, x_max, p_max (0: automatic), anomalous,
//               coefficients = auto|series|hight|classical_zero
// [sweep]       axis, values

#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"
#include "qbm/evolution.hpp"

namespace qbm {

enum class Engine { Moments, Grid, FokkerPlanck };
enum class Output { Coefficients, Trajectory, Decoherence, Timescales };
enum class FpCoefficients { Auto, Series, HighT, ClassicalZero };

inline std::string to_string(Engine e) {
    switch (e) {
        case Engine::Moments: return "moments";
        case Engine::Grid: return "grid";
        case Engine::FokkerPlanck: return "fokker_planck";
    }
    return "moments";
}

inline std::string to_string(Output o) {
    switch (o) {
        case Output::Coefficients: return "coefficients";
        case Output::Trajectory: return "trajectory";
        case Output::Decoherence: return "decoherence";
        case Output::Timescales: return "timescales";
    }
    return "trajectory";
}

inline std::string to_string(FpCoefficients c) {
    switch (c) {
        case FpCoefficients::Auto: return "auto";
        case FpCoefficients::Series: return "series";
        case FpCoefficients::HighT: return "hight";
        case FpCoefficients::ClassicalZero: return "classical_zero";
    }
    return "auto";
}

inline Engine parse_engine(const std::string& s) {
    if (s == "moments") return Engine::Moments;
    if (s == "grid") return Engine::Grid;
    if (s == "fokker_planck" || s == "fp" || s == "classical") return Engine::FokkerPlanck;
    throw ConfigError("unknown engine '" + s + "'");
}

inline Output parse_output(const std::string& s) {
    if (s == "coefficients") return Output::Coefficients;
    if (s == "trajectory") return Output::Trajectory;
    if (s == "decoherence") return Output::Decoherence;
    if (s == "timescales") return Output::Timescales;
    throw ConfigError("unknown output '" + s + "'");
}

inline FpCoefficients parse_fp_coefficients(const std::string& s) {
    if (s == "auto") return FpCoefficients::Auto;
    if (s == "series") return FpCoefficients::Series;
    if (s == "hight") return FpCoefficients::HighT;
    if (s == "classical_zero") return FpCoefficients::ClassicalZero;
    throw ConfigError("unknown fp.coefficients '" + s + "'");
}

struct GridSettings {
    std::size_t n{256};
    double l_box{0.0};
};

struct FpSettings {
    std::size_t nx{128}, np{128};
    double x_max{0.0}, p_max{0.0};
    bool anomalous{false};
    FpCoefficients coefficients{FpCoefficients::Auto};
};

struct SweepSettings {
    std::string axis;
    std::vector<double> values;
};

struct RunConfig {
    std::string name;
    EnvironmentSpec env{};
    OscillatorSpec sys{};
    InitialState initial{};
    Engine engine{Engine::Moments};
    double t_end{1.0};
    double dt{1e-3};
    std::size_t samples{2000};
    std::vector<Output> outputs{Output::Trajectory};
    std::string output_dir{"."};
    bool allow_long{false};
    bool counterterm{true};
    bool renormalized_frequency{false};
    bool bare_energy{false};
    std::size_t record_every{1};
    double activation_gap{0.0};  // energy rise defining t_th; 0 means one quantum Ω
    GridSettings grid{};
    FpSettings fp{};
    std::optional<SweepSettings> sweep;

    bool wants(Output o) const {
        return std::find(outputs.begin(), outputs.end(), o) != outputs.end();
    }
};

namespace detail {

inline std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    boost::split(parts, s, boost::is_any_of(",; "), boost::token_compress_on);
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

inline const std::map<std::string, std::string>& sweep_axes() {
    static const std::map<std::string, std::string> axes = {
        {"n", "environment.n"},         {"gamma0", "environment.gamma0"},
        {"cutoff", "environment.cutoff"}, {"beta", "environment.beta"},
        {"kT", "environment.kT"},       {"mass_ref", "environment.mass_ref"},
        {"mass", "system.mass"},        {"omega", "system.omega"},
        {"L0", "initial.L0"},           {"sigma", "initial.sigma"},
        {"x0", "initial.x0"},           {"p0", "initial.p0"}};
    return axes;
}

template <class T>
T get(const boost::property_tree::ptree& t, const std::string& path, T fallback) {
    auto v = t.get_optional<std::string>(path);
    if (!v) return fallback;
    std::string s = boost::trim_copy(*v);
    try {
        if constexpr (std::is_same_v<T, bool>) {
            boost::to_lower(s);
            if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
            if (s == "false" || s == "no" || s == "0" || s == "off") return false;
            throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            return s;
        } else if constexpr (std::is_same_v<T, std::size_t>) {
            std::size_t pos = 0;
            const long long x = std::stoll(s, &pos);
            if (pos != s.size() || x < 0) throw ConfigError("");
            return static_cast<std::size_t>(x);
        } else {
            std::size_t pos = 0;
            const double x = std::stod(s, &pos);
            if (pos != s.size()) throw ConfigError("");
            return x;
        }
    } catch (const std::exception&) {
        throw ConfigError("invalid value '" + s + "' for " + path);
    }
}

}  // namespace detail

// Resolves a sweep axis name to its "section.key" path; throws ConfigError.
inline std::string sweep_axis_path(const std::string& axis) {
    const auto& axes = detail::sweep_axes();
    if (auto it = axes.find(axis); it != axes.end()) return it->second;
    for (const auto& [k, path] : axes)
        if (path == axis) return path;
    throw ConfigError("unknown sweep axis '" + axis + "'");
}

inline RunConfig config_from_ptree(const boost::property_tree::ptree& t) {
    using detail::get;
    static const std::map<std::string, std::vector<std::string>> known = {
        {"meta", {"name"}},
        {"environment", {"n", "gamma0", "cutoff", "temperature", "beta", "kT", "mass_ref"}},
        {"system", {"mass", "omega"}},
        {"initial", {"kind", "x0", "p0", "L0", "sigma"}},
        {"run",
         {"engine", "t_end", "dt", "samples", "outputs", "output_dir", "allow_long", "counterterm",
          "renormalized_frequency", "bare_energy", "record_every", "activation_gap"}},
        {"grid", {"n", "l_box"}},
        {"fp", {"nx", "np", "x_max", "p_max", "anomalous", "coefficients"}},
        {"sweep", {"axis", "values"}}};
    for (const auto& [section, body] : t) {
        auto it = known.find(section);
        if (it == known.end()) throw ConfigError("unknown section [" + section + "]");
        for (const auto& [key, value] : body)
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }

    RunConfig c;
    c.name = get<std::string>(t, "meta.name", "");
    c.env.n = get(t, "environment.n", 1.0);
    c.env.gamma0 = get(t, "environment.gamma0", 0.0);
    c.env.cutoff = get(t, "environment.cutoff", 1.0);
    c.env.mass_ref = get(t, "environment.mass_ref", 0.0);
    const auto temp = get<std::string>(t, "environment.temperature", "zero");
    if (temp == "zero") c.env.temperature = ZeroTemperature{};
    else if (temp == "finite") c.env.temperature = FiniteTemperature{get(t, "environment.beta", 1.0)};
    else if (temp == "high") c.env.temperature = HighTemperature{get(t, "environment.kT", 1.0)};
    else if (temp == "mimic") c.env.temperature = zero_point_mimic();
    else throw ConfigError("unknown temperature regime '" + temp + "'");

    c.sys.mass = get(t, "system.mass", 1.0);
    c.sys.omega_bare = get(t, "system.omega", 1.0);
    if (c.env.mass_ref == 0.0) c.env.mass_ref = c.sys.mass;

    const auto kind = get<std::string>(t, "initial.kind", "gaussian");
    const double sigma = get(t, "initial.sigma", 0.0);
    if (kind == "gaussian")
        c.initial.kind = SingleGaussian{get(t, "initial.x0", 0.0), get(t, "initial.p0", 0.0), sigma};
    else if (kind == "superposition")
        c.initial.kind = SymmetricSuperposition{get(t, "initial.L0", 0.0), sigma};
    else throw ConfigError("unknown initial state kind '" + kind + "'");
    c.initial.sys = c.sys;

    c.engine = parse_engine(get<std::string>(t, "run.engine", "moments"));
    c.t_end = get(t, "run.t_end", 1.0);
    c.dt = get(t, "run.dt", 1e-3);
    c.samples = get<std::size_t>(t, "run.samples", 2000);
    c.outputs.clear();
    for (const auto& o : detail::split_list(get<std::string>(t, "run.outputs", "trajectory")))
        c.outputs.push_back(parse_output(o));
    c.output_dir = get<std::string>(t, "run.output_dir", ".");
    c.allow_long = get(t, "run.allow_long", false);
    c.counterterm = get(t, "run.counterterm", true);
    c.renormalized_frequency = get(t, "run.renormalized_frequency", false);
    c.bare_energy = get(t, "run.bare_energy", false);
    c.record_every = get<std::size_t>(t, "run.record_every", 1);
    c.activation_gap = get(t, "run.activation_gap", 0.0);

    c.grid.n = get<std::size_t>(t, "grid.n", 256);
    c.grid.l_box = get(t, "grid.l_box", 0.0);
    c.fp.nx = get<std::size_t>(t, "fp.nx", 128);
    c.fp.np = get<std::size_t>(t, "fp.np", 128);
    c.fp.x_max = get(t, "fp.x_max", 0.0);
    c.fp.p_max = get(t, "fp.p_max", 0.0);
    c.fp.anomalous = get(t, "fp.anomalous", false);
    c.fp.coefficients = parse_fp_coefficients(get<std::string>(t, "fp.coefficients", "auto"));

    if (t.get_child_optional("sweep")) {
        SweepSettings s;
        s.axis = get<std::string>(t, "sweep.axis", "");
        for (const auto& v : detail::split_list(get<std::string>(t, "sweep.values", ""))) {
            try {
                s.values.push_back(std::stod(v));
            } catch (const std::exception&) {
                throw ConfigError("invalid sweep value '" + v + "'");
            }
        }
        c.sweep = s;
    }
    return c;
}

inline RunConfig parse_config(std::istream& is) {
    boost::property_tree::ptree t;
    try {
        boost::property_tree::read_ini(is, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.message());
    }
    return config_from_ptree(t);
}

inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline boost::property_tree::ptree config_to_ptree(const RunConfig& c) {
    using detail::format_number;
    boost::property_tree::ptree t;
    if (!c.name.empty()) t.put("meta.name", c.name);
    t.put("environment.n", format_number(c.env.n));
    t.put("environment.gamma0", format_number(c.env.gamma0));
    t.put("environment.cutoff", format_number(c.env.cutoff));
    struct V {
        boost::property_tree::ptree& t;
        void operator()(const ZeroTemperature&) const { t.put("environment.temperature", "zero"); }
        void operator()(const FiniteTemperature& f) const {
            t.put("environment.temperature", "finite");
            t.put("environment.beta", detail::format_number(f.beta));
        }
        void operator()(const HighTemperature& h) const {
            t.put("environment.temperature", "high");
            t.put("environment.kT", detail::format_number(h.kT));
        }
        void operator()(const ClassicalProfile&) const { t.put("environment.temperature", "mimic"); }
    };
    std::visit(V{t}, c.env.temperature);
    if (c.env.mass_ref != c.sys.mass) t.put("environment.mass_ref", format_number(c.env.mass_ref));
    t.put("system.mass", format_number(c.sys.mass));
    t.put("system.omega", format_number(c.sys.omega_bare));
    if (auto* g = std::get_if<SingleGaussian>(&c.initial.kind)) {
        t.put("initial.kind", "gaussian");
        t.put("initial.x0", format_number(g->x0));
        t.put("initial.p0", format_number(g->p0));
        t.put("initial.sigma", format_number(g->sigma));
    } else {
        const auto& s = std::get<SymmetricSuperposition>(c.initial.kind);
        t.put("initial.kind", "superposition");
        t.put("initial.L0", format_number(s.half_separation));
        t.put("initial.sigma", format_number(s.sigma));
    }
    t.put("run.engine", to_string(c.engine));
    t.put("run.t_end", format_number(c.t_end));
    t.put("run.dt", format_number(c.dt));
    t.put("run.samples", c.samples);
    std::string outs;
    for (std::size_t i = 0; i < c.outputs.size(); ++i)
        outs += (i ? "," : "") + to_string(c.outputs[i]);
    t.put("run.outputs", outs);
    t.put("run.output_dir", c.output_dir);
    t.put("run.allow_long", c.allow_long ? "true" : "false");
    t.put("run.counterterm", c.counterterm ? "true" : "false");
    t.put("run.renormalized_frequency", c.renormalized_frequency ? "true" : "false");
    t.put("run.bare_energy", c.bare_energy ? "true" : "false");
    t.put("run.record_every", c.record_every);
    t.put("run.activation_gap", format_number(c.activation_gap));
    t.put("grid.n", c.grid.n);
    t.put("grid.l_box", format_number(c.grid.l_box));
    t.put("fp.nx", c.fp.nx);
    t.put("fp.np", c.fp.np);
    t.put("fp.x_max", format_number(c.fp.x_max));
    t.put("fp.p_max", format_number(c.fp.p_max));
    t.put("fp.anomalous", c.fp.anomalous ? "true" : "false");
    t.put("fp.coefficients", to_string(c.fp.coefficients));
    if (c.sweep) {
        t.put("sweep.axis", c.sweep->axis);
        std::string vals;
        for (std::size_t i = 0; i < c.sweep->values.size(); ++i)
            vals += (i ? "," : "") + format_number(c.sweep->values[i]);
        t.put("sweep.values", vals);
    }
    return t;
}

inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    boost::property_tree::write_ini(os, config_to_ptree(c));
    return os.str();
}

// Throws ConfigError for anything that would make the run meaningless.
inline void validate_config(const RunConfig& c) {
    try {
        c.env.validate();
        c.sys.validate();
        c.initial.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (c.outputs.empty()) throw ConfigError("outputs list is empty");
    if (!(c.t_end > 0.0)) throw ConfigError("run.t_end must be > 0");
    if (!(c.dt > 0.0) || c.dt > c.t_end) throw ConfigError("run.dt must be in (0, t_end]");
    if (c.samples < 2) throw ConfigError("run.samples must be >= 2");
    if (c.record_every < 1) throw ConfigError("run.record_every must be >= 1");
    if (c.env.gamma0 > 0.0 && c.t_end > 1.0 / c.env.gamma0 && !c.allow_long)
        throw ConfigError("t_end exceeds the saturation time 1/gamma0; pass --allow-long to run anyway");
    if (c.engine == Engine::FokkerPlanck && c.wants(Output::Decoherence))
        throw ConfigError("the fokker_planck engine cannot produce quantum-only outputs (decoherence)");
    if (c.engine == Engine::Grid && c.grid.n < 8) throw ConfigError("grid.n must be >= 8");
    if (c.grid.l_box < 0.0) throw ConfigError("grid.l_box must be >= 0");
    if (c.engine == Engine::FokkerPlanck && (c.fp.nx < 8 || c.fp.np < 8))
        throw ConfigError("fp.nx and fp.np must be >= 8");
    if (c.fp.coefficients == FpCoefficients::HighT && (!c.env.is_high_temperature() || c.env.n != 1.0))
        throw ConfigError("fp.coefficients = hight requires an ohmic high-temperature environment");
    if (c.sweep) {
        sweep_axis_path(c.sweep->axis);
        if (c.sweep->values.empty()) throw ConfigError("sweep.values is empty");
    }
}

}  // namespace qbm
