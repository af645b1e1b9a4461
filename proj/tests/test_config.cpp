#include "cyberinv/config.hpp"
#include "cyberinv/errors.hpp"

#include <doctest.h>

#include <cstdlib>
#include <random>
#include <sstream>
#include <string>

using namespace cyberinv;

namespace {

RunConfig parse(const std::string& text, bool env = false) {
    std::istringstream in(text);
    return parse_config(in, "<test>", env);
}

std::string config_error(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("shipped standard.cfg equals the built-in defaults") {
    const RunConfig cfg = load_config(CYBERINV_SOURCE_DIR "/configs/standard.cfg", false);
    CHECK(cfg == default_config(false));
    CHECK(cfg.problem.hawkes == HawkesParams(27, 27, 15, 9));
    CHECK(cfg.problem.breach.v == 0.65);
    CHECK(cfg.problem.breach.a == 0.1);
    CHECK(cfg.problem.costs.gamma == 0.05);
    CHECK(cfg.problem.costs.rho == 0.2);
    CHECK(cfg.grid == SolverGrid::reference());
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("empty input gives defaults; missing gamma takes 0.05") {
    CHECK(parse("") == default_config(false));
    const auto cfg = parse("[costs]\ndelta = 1\n");
    CHECK(cfg.problem.costs.gamma == 0.05);
}

TEST_CASE("lambda_min follows lambda0 unless set") {
    CHECK(parse("[hawkes]\nlambda0 = 30\nalpha = 30\n").grid.lambda_min == 30.0);
    CHECK(parse("[hawkes]\nlambda0 = 30\nalpha=30\n[grid]\nlambda_min = 21\n").grid.lambda_min == 21.0);
}

TEST_CASE("unstable excitation is rejected with the stability condition") {
    const std::string msg = config_error("[hawkes]\nbeta = 20\nxi = 15\n");
    CHECK(msg.find("beta < xi") != std::string::npos);
}

TEST_CASE("every problem is reported at once, with its key") {
    const std::string msg = config_error(
        "[hawkes]\nxi = fast\n[costs]\ngamma = -1\ncolour = red\n[nonsense]\nx = 1\n[grid]\nd_h = 0.7\n");
    CHECK(msg.find("[hawkes] xi") != std::string::npos);
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("[costs] colour") != std::string::npos);
    CHECK(msg.find("nonsense") != std::string::npos);
    CHECK(msg.find("d_h") != std::string::npos);
}

TEST_CASE("cross-field validation") {
    RunConfig cfg = default_config(false);
    cfg.grid.lambda_min = 30.0;
    cfg.grid.lambda_max = 216.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);  // grid misses lambda0 = 27
    cfg = default_config(false);
    cfg.premium.mc_paths = 500;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = default_config(false);
    cfg.solver.rtol = 0.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("environment overrides") {
    ::setenv("CYBERINV_COSTS_GAMMA", "0.07", 1);
    ::setenv("CYBERINV_RUN_SEED", "17", 1);
    const auto with_env = parse("[costs]\ngamma = 0.05\n", true);
    const auto without = parse("[costs]\ngamma = 0.05\n", false);
    ::unsetenv("CYBERINV_COSTS_GAMMA");
    ::unsetenv("CYBERINV_RUN_SEED");
    CHECK(with_env.problem.costs.gamma == 0.07);
    CHECK(with_env.seed == 17);
    CHECK(without.problem.costs.gamma == 0.05);

    ::setenv("CYBERINV_HAWKES_BETA", "oops", 1);
    CHECK_THROWS_AS(default_config(true), ConfigError);
    ::unsetenv("CYBERINV_HAWKES_BETA");
}

TEST_CASE("coarse preset and round trip through write_config") {
    RunConfig cfg = default_config(false);
    apply_coarse_preset(cfg);
    CHECK(cfg.grid == SolverGrid::coarse());
    cfg.gain.lambda_values = {};
    cfg.solver.upwind = true;
    cfg.problem.costs.utility = TerminalUtility::power(0.3);
    std::ostringstream out;
    write_config(out, cfg);
    CHECK(parse(out.str()) == cfg);
}

TEST_CASE("validation is total: random and mangled input never escapes as anything but ConfigError") {
    std::mt19937_64 gen(12345);
    const std::string standard = [] {
        std::ostringstream s;
        write_config(s, default_config(false));
        return s.str();
    }();
    const std::string alphabet = "[]=;#\n abcxyz_019.-+eE\t\"\\";
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text = standard;
        const int edits = 1 + static_cast<int>(gen() % 12);
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = gen() % (text.size() + 1);
            switch (gen() % 3) {
            case 0:
                text.insert(pos, 1, alphabet[gen() % alphabet.size()]);
                break;
            case 1:
                if (pos < text.size()) {
                    text.erase(pos, 1);
                }
                break;
            default:
                if (pos < text.size()) {
                    text[pos] = static_cast<char>(gen() % 256);
                }
            }
        }
        try {
            const auto cfg = parse(text);
            validate_config(cfg);
        } catch (const ConfigError&) {
        }
    }
}
