#include "cyberinv/config.hpp"

#include "cyberinv/csv.hpp"
#include "cyberinv/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace cyberinv {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
    auto blank = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), blank));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), blank).base(), s.end());
    return s;
}

double parse_double(const std::string& text) {
    const std::string s = trim(text);
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(x)) {
        throw ArgumentError("expected a finite number, got '" + s + "'");
    }
    return x;
}

std::uint64_t parse_unsigned(const std::string& text) {
    const std::string s = trim(text);
    std::uint64_t x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ArgumentError("expected a nonnegative integer, got '" + s + "'");
    }
    return x;
}

bool parse_bool(const std::string& text) {
    std::string s = trim(text);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "yes" || s == "on" || s == "1") {
        return true;
    }
    if (s == "false" || s == "no" || s == "off" || s == "0") {
        return false;
    }
    throw ArgumentError("expected true or false, got '" + s + "'");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!trim(item).empty()) {
            out.push_back(parse_double(item));
        }
    }
    return out;
}

std::string format_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? ", " : "") + format_number(xs[i]);
    }
    return out;
}

/// Mutable mirror of RunConfig; HawkesParams validates on construction, so
/// its fields are collected here first.
struct Draft {
    double alpha = 27.0;
    double lambda0 = 27.0;
    double xi = 15.0;
    double beta = 9.0;
    bool lambda_min_set = false;
    RunConfig config;
};

struct Key {
    const char* section;
    const char* name;
    std::function<void(Draft&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& schema() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        auto num = [&k](const char* sec, const char* name, auto member) {
            k.push_back({sec, name,
                         [member](Draft& d, const std::string& s) { member(d) = parse_double(s); },
                         [member](const RunConfig& c) {
                             Draft d;
                             d.config = c;
                             d.alpha = c.problem.hawkes.alpha();
                             d.lambda0 = c.problem.hawkes.lambda0();
                             d.xi = c.problem.hawkes.xi();
                             d.beta = c.problem.hawkes.beta();
                             return format_number(member(d));
                         }});
        };
        auto count = [&k](const char* sec, const char* name, auto member) {
            k.push_back({sec, name,
                         [member](Draft& d, const std::string& s) {
                             member(d.config) = static_cast<std::remove_reference_t<
                                 decltype(member(d.config))>>(parse_unsigned(s));
                         },
                         [member](const RunConfig& c) {
                             RunConfig copy = c;
                             return std::to_string(member(copy));
                         }});
        };

        num("hawkes", "alpha", [](Draft& d) -> double& { return d.alpha; });
        num("hawkes", "lambda0", [](Draft& d) -> double& { return d.lambda0; });
        num("hawkes", "xi", [](Draft& d) -> double& { return d.xi; });
        num("hawkes", "beta", [](Draft& d) -> double& { return d.beta; });

        k.push_back({"breach", "family",
                     [](Draft& d, const std::string& s) {
                         d.config.problem.breach.family = parse_breach_family(trim(s));
                     },
                     [](const RunConfig& c) {
                         return std::string(to_string(c.problem.breach.family));
                     }});
        num("breach", "v", [](Draft& d) -> double& { return d.config.problem.breach.v; });
        num("breach", "a", [](Draft& d) -> double& { return d.config.problem.breach.a; });
        num("breach", "b", [](Draft& d) -> double& { return d.config.problem.breach.b; });

        num("costs", "delta", [](Draft& d) -> double& { return d.config.problem.costs.delta; });
        num("costs", "gamma", [](Draft& d) -> double& { return d.config.problem.costs.gamma; });
        num("costs", "eta_mean",
            [](Draft& d) -> double& { return d.config.problem.costs.eta_mean; });
        num("costs", "eta_var", [](Draft& d) -> double& { return d.config.problem.costs.eta_var; });
        num("costs", "rho", [](Draft& d) -> double& { return d.config.problem.costs.rho; });
        num("costs", "horizon", [](Draft& d) -> double& { return d.config.problem.costs.horizon; });
        k.push_back({"costs", "utility",
                     [](Draft& d, const std::string& s) {
                         d.config.problem.costs.utility = TerminalUtility::parse(trim(s));
                     },
                     [](const RunConfig& c) { return c.problem.costs.utility.to_string(); }});
        k.push_back({"costs", "loss_family",
                     [](Draft& d, const std::string& s) {
                         d.config.problem.costs.loss_family = parse_loss_family(trim(s));
                     },
                     [](const RunConfig& c) {
                         return std::string(to_string(c.problem.costs.loss_family));
                     }});

        k.push_back({"grid", "lambda_min",
                     [](Draft& d, const std::string& s) {
                         d.config.grid.lambda_min = parse_double(s);
                         d.lambda_min_set = true;
                     },
                     [](const RunConfig& c) { return format_number(c.grid.lambda_min); }});
        num("grid", "lambda_max", [](Draft& d) -> double& { return d.config.grid.lambda_max; });
        num("grid", "d_lambda", [](Draft& d) -> double& { return d.config.grid.d_lambda; });
        num("grid", "h_min", [](Draft& d) -> double& { return d.config.grid.h_min; });
        num("grid", "h_max", [](Draft& d) -> double& { return d.config.grid.h_max; });
        num("grid", "d_h", [](Draft& d) -> double& { return d.config.grid.d_h; });
        count("grid", "snapshot_intervals",
              [](RunConfig& c) -> std::size_t& { return c.grid.snapshot_intervals; });

        num("solver", "rtol", [](Draft& d) -> double& { return d.config.solver.rtol; });
        num("solver", "atol", [](Draft& d) -> double& { return d.config.solver.atol; });
        k.push_back({"solver", "upwind",
                     [](Draft& d, const std::string& s) { d.config.solver.upwind = parse_bool(s); },
                     [](const RunConfig& c) { return std::string(c.solver.upwind ? "true" : "false"); }});
        k.push_back({"solver", "jump_shift",
                     [](Draft& d, const std::string& s) {
                         d.config.solver.jump_shift = parse_jump_shift(trim(s));
                     },
                     [](const RunConfig& c) { return std::string(to_string(c.solver.jump_shift)); }});
        k.push_back({"solver", "query",
                     [](Draft& d, const std::string& s) {
                         d.config.solver.query = parse_query_mode(trim(s));
                     },
                     [](const RunConfig& c) { return std::string(to_string(c.solver.query)); }});
        count("solver", "stream_threshold",
              [](RunConfig& c) -> std::size_t& { return c.solver.stream_threshold; });

        num("gain", "t", [](Draft& d) -> double& { return d.config.gain.t; });
        k.push_back({"gain", "h_values",
                     [](Draft& d, const std::string& s) { d.config.gain.h_values = parse_list(s); },
                     [](const RunConfig& c) { return format_list(c.gain.h_values); }});
        k.push_back({"gain", "lambda_values",
                     [](Draft& d, const std::string& s) {
                         d.config.gain.lambda_values = parse_list(s);
                     },
                     [](const RunConfig& c) { return format_list(c.gain.lambda_values); }});
        k.push_back({"gain", "benchmark",
                     [](Draft& d, const std::string& s) {
                         const std::string b = trim(s);
                         if (b != "constant" && b != "baseline" && b != "expectation" && b != "all") {
                             throw ArgumentError("expected constant, baseline, expectation or all, got '" +
                                                 b + "'");
                         }
                         d.config.gain.benchmark = b;
                     },
                     [](const RunConfig& c) { return c.gain.benchmark; }});

        num("premium", "theta", [](Draft& d) -> double& { return d.config.premium.theta; });
        k.push_back({"premium", "eta_vars",
                     [](Draft& d, const std::string& s) {
                         d.config.premium.eta_vars = parse_list(s);
                     },
                     [](const RunConfig& c) { return format_list(c.premium.eta_vars); }});
        count("premium", "mc_paths",
              [](RunConfig& c) -> std::size_t& { return c.premium.mc_paths; });

        count("trace", "paths", [](RunConfig& c) -> std::size_t& { return c.trace.paths; });
        num("trace", "t_init", [](Draft& d) -> double& { return d.config.trace.t_init; });
        num("trace", "h_init", [](Draft& d) -> double& { return d.config.trace.h_init; });

        k.push_back({"run", "output_dir",
                     [](Draft& d, const std::string& s) {
                         const std::string dir = trim(s);
                         if (dir.empty()) {
                             throw ArgumentError("must not be empty");
                         }
                         d.config.output_dir = dir;
                     },
                     [](const RunConfig& c) { return c.output_dir.string(); }});
        k.push_back({"run", "seed",
                     [](Draft& d, const std::string& s) { d.config.seed = parse_unsigned(s); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }});
        count("run", "threads", [](RunConfig& c) -> unsigned& { return c.threads; });
        return k;
    }();
    return keys;
}

std::string env_name(const Key& key) {
    std::string out = "CYBERINV_";
    for (const char* p : {key.section, "_", key.name}) {
        for (const char* c = p; *c != '\0'; ++c) {
            out += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
        }
    }
    return out;
}

std::vector<std::string> config_problems(const RunConfig& c);

void throw_if_any(const std::vector<std::string>& problems, const std::string& source) {
    if (problems.empty()) {
        return;
    }
    std::ostringstream msg;
    msg << source << ": " << problems.size() << " configuration error"
        << (problems.size() == 1 ? "" : "s");
    for (const auto& p : problems) {
        msg << "\n  " << p;
    }
    throw ConfigError(msg.str());
}

RunConfig build(const pt::ptree* tree, const std::string& source, bool use_env) {
    Draft draft;
    std::vector<std::string> problems;

    auto apply = [&](const Key& key, const std::string& value, const std::string& origin) {
        try {
            key.set(draft, value);
        } catch (const std::exception& e) {
            problems.push_back(origin + "[" + key.section + "] " + key.name + ": " + e.what());
        }
    };

    if (tree != nullptr) {
        for (const auto& [section, body] : *tree) {
            if (!body.data().empty() && body.empty()) {
                problems.push_back("key '" + section + "' must appear inside a [section]");
                continue;
            }
            bool known_section = false;
            for (const auto& key : schema()) {
                known_section = known_section || section == key.section;
            }
            if (!known_section) {
                problems.push_back("unknown section [" + section + "]");
                continue;
            }
            for (const auto& [name, child] : body) {
                const auto it = std::find_if(schema().begin(), schema().end(), [&](const Key& k) {
                    return section == k.section && name == k.name;
                });
                if (it == schema().end()) {
                    problems.push_back("unknown key [" + section + "] " + name);
                    continue;
                }
                apply(*it, child.data(), "");
            }
        }
    }
    if (use_env) {
        for (const auto& key : schema()) {
            const std::string var = env_name(key);
            if (const char* value = std::getenv(var.c_str())) {
                apply(key, value, var + " -> ");
            }
        }
    }

    RunConfig& c = draft.config;
    try {
        c.problem.hawkes = HawkesParams(draft.alpha, draft.lambda0, draft.xi, draft.beta);
    } catch (const StabilityError& e) {
        problems.push_back(std::string("[hawkes] beta: ") + e.what() +
                           " (stability requires beta < xi)");
    } catch (const ArgumentError& e) {
        problems.push_back(std::string("[hawkes]: ") + e.what());
    }
    if (!draft.lambda_min_set) {
        c.grid.lambda_min = draft.lambda0;
    }
    for (auto& p : config_problems(c)) {
        problems.push_back(std::move(p));
    }
    throw_if_any(problems, source);
    return c;
}

} // namespace

void validate_config(const RunConfig& c) { throw_if_any(config_problems(c), "configuration"); }

namespace {

std::vector<std::string> config_problems(const RunConfig& c) {
    std::vector<std::string> problems;
    auto check = [&](const char* where, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            problems.push_back(std::string(where) + ": " + e.what());
        }
    };
    check("[breach]", [&] { c.problem.breach.validate(); });
    check("[costs]", [&] { c.problem.costs.validate(); });
    check("[grid]", [&] { c.grid.validate(); });
    const double l0 = c.problem.hawkes.lambda0();
    if (l0 < c.grid.lambda_min || l0 > c.grid.lambda_max) {
        problems.push_back("[grid] lambda_min/lambda_max: grid [" + format_number(c.grid.lambda_min) +
                           ", " + format_number(c.grid.lambda_max) + "] does not cover lambda0 = " +
                           format_number(l0));
    }
    if (!(c.solver.rtol > 0.0) || !(c.solver.atol > 0.0)) {
        problems.push_back("[solver] rtol/atol: tolerances must be > 0");
    }
    const double horizon = c.problem.costs.horizon;
    if (!(c.gain.t >= 0.0 && c.gain.t <= horizon)) {
        problems.push_back("[gain] t: must lie in [0, horizon]");
    }
    for (double h : c.gain.h_values) {
        if (h < 0.0) {
            problems.push_back("[gain] h_values: levels must be >= 0");
            break;
        }
    }
    for (double l : c.gain.lambda_values) {
        if (l < 0.0) {
            problems.push_back("[gain] lambda_values: intensities must be >= 0");
            break;
        }
    }
    if (c.premium.theta < 0.0) {
        problems.push_back("[premium] theta: must be >= 0");
    }
    if (c.premium.eta_vars.empty()) {
        problems.push_back("[premium] eta_vars: at least one value required");
    }
    for (double s2 : c.premium.eta_vars) {
        if (s2 < 0.0) {
            problems.push_back("[premium] eta_vars: variances must be >= 0");
            break;
        }
    }
    if (c.premium.mc_paths < 10'000) {
        problems.push_back("[premium] mc_paths: at least 10000 paths required");
    }
    if (!(c.trace.t_init >= 0.0 && c.trace.t_init <= horizon)) {
        problems.push_back("[trace] t_init: must lie in [0, horizon]");
    }
    if (c.trace.h_init < 0.0) {
        problems.push_back("[trace] h_init: must be >= 0");
    }
    return problems;
}

} // namespace

RunConfig parse_config(std::istream& in, const std::string& source, bool use_env) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ": line " + std::to_string(e.line()) + ": " + e.message());
    }
    return build(&tree, source, use_env);
}

RunConfig load_config(const std::filesystem::path& path, bool use_env) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    return parse_config(in, path.string(), use_env);
}

RunConfig default_config(bool use_env) { return build(nullptr, "<defaults>", use_env); }

void apply_coarse_preset(RunConfig& config) {
    const auto coarse = SolverGrid::coarse();
    config.grid.d_lambda = coarse.d_lambda;
    config.grid.d_h = coarse.d_h;
    config.grid.lambda_max = coarse.lambda_max;
    validate_config(config);
}

void write_config(std::ostream& out, const RunConfig& config) {
    std::string section;
    for (const auto& key : schema()) {
        if (section != key.section) {
            if (!section.empty()) {
                out << '\n';
            }
            section = key.section;
            out << '[' << section << "]\n";
        }
        out << key.name << " = " << key.get(config) << '\n';
    }
}

} // namespace cyberinv
