// End-to-end checks of the CLI binary; the path arrives as argv[1].

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

std::string g_cli;
std::string g_dir;

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    std::string cmd = g_cli + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) r.output += buf;
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string path(const std::string& name) { return g_dir + "/" + name; }

} // namespace

TEST_CASE("spectrum generation writes valid json") {
    auto r = run("spectrum --family squares --count 2000 --out " + path("sq.json"));
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(slurp(path("sq.json")));
    CHECK(j["family"] == "squares");
    CHECK(j["points"].size() == 2000);
    CHECK(j["points"][2] == 9.0);
}

TEST_CASE("custom spectra omit the family") {
    auto r = run("spectrum --custom 1,4,9 --out " + path("custom.json"));
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(slurp(path("custom.json")));
    CHECK(!j.contains("family"));
    CHECK(j["points"].size() == 3);
}

TEST_CASE("bad flags exit 1") {
    CHECK(run("spectrum --family not_a_family --out " + path("x.json")).exit_code == 1);
    CHECK(run("diagnose --spectrum " + path("missing.json")).exit_code == 1);
    CHECK(run("frobnicate").exit_code == 1);
}

TEST_CASE("diagnose verdicts and exit codes") {
    run("spectrum --family squares --count 3000 --out " + path("sq3.json"));
    auto r = run("diagnose --spectrum " + path("sq3.json") + " --out-report " +
                 path("rep.json") + " --out-terms " + path("terms.csv"));
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(slurp(path("rep.json")));
    CHECK(j["verdict"] == "Removable");
    CHECK(double(j["confidence"]) >= 0.9);
    auto csv = slurp(path("terms.csv"));
    CHECK(csv.rfind("n,t_n,A_prime,k_n,partial_sum\n", 0) == 0);

    run("spectrum --family integers_punctured --count 3000 --out " + path("ints.json"));
    auto r2 = run("diagnose --spectrum " + path("ints.json") + " --out-report " +
                  path("rep2.json"));
    CHECK(r2.exit_code == 0);
    CHECK(nlohmann::json::parse(slurp(path("rep2.json")))["verdict"] == "Nonremovable");

    // boundary case: decisively divergent exponent just inside the band
    run("spectrum --family shifted_progression --a 0.94 --count 3000 --out " +
        path("border.json"));
    auto r3 = run("diagnose --spectrum " + path("border.json") + " --strict --out-report " +
                  path("rep3.json"));
    CHECK(r3.exit_code == 3);
}

TEST_CASE("synthesize then verify closes the loop") {
    run("spectrum --family squares --count 2000 --out " + path("sq2.json"));
    auto r = run("synthesize --spectrum " + path("sq2.json") + " --out " + path("pert.json"));
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(slurp(path("pert.json")));
    CHECK(j["delta"] == 1.0);
    CHECK(j["flags"]["synthesized"] == true);

    auto r2 = run("verify --pert " + path("pert.json") +
                  " --mode both --N 100 --rect -30,30,-30,30 --out-report " +
                  path("verify.json") + " --out-collapse " + path("collapse.csv") +
                  " --out-contour " + path("contour.csv"));
    CHECK(r2.exit_code == 0);
    CHECK(slurp(path("contour.csv")).rfind("x,y,re_beta,im_beta,phase\n", 0) == 0);
    auto v = nlohmann::json::parse(slurp(path("verify.json")));
    CHECK(v["winding"]["zeros"] == 0);
    auto csv = slurp(path("collapse.csv"));
    CHECK(csv.rfind("N,spectral_radius,n_zeros_in_window\n", 0) == 0);

    // refusal on a nonremovable spectrum without force
    run("spectrum --family integers_punctured --count 2000 --out " + path("ints2.json"));
    CHECK(run("synthesize --spectrum " + path("ints2.json") + " --out " + path("p2.json"))
              .exit_code == 2);
}

TEST_CASE("sweep emits the fixed header and flips at the boundary") {
    auto r = run("sweep --family one_sided_power --gamma 1.5:2.5:0.5 --count 2000 --out " +
                 path("sweep.csv"));
    CHECK(r.exit_code == 0);
    auto csv = slurp(path("sweep.csv"));
    CHECK(csv.rfind("param,verdict,confidence,u_minus,u_plus\n", 0) == 0);
    CHECK(csv.find("1.5,Nonremovable") != std::string::npos);
    CHECK(csv.find("2.5,Removable") != std::string::npos);
}

TEST_CASE("nustar writes a step log") {
    run("spectrum --family squares --count 1200 --out " + path("sqn.json"));
    auto r = run("nustar --spectrum " + path("sqn.json") + " --steps 2 --closed --out " +
                 path("nustar.json"));
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(slurp(path("nustar.json")));
    CHECK(j["steps"].size() == 2);
    CHECK(j["steps"][0]["checks"]["growth"] == true);
}

TEST_CASE("outputs are deterministic with --no-meta") {
    auto one = run("--no-meta spectrum --family livsic --c 2 --count 50");
    auto two = run("--no-meta spectrum --family livsic --c 2 --count 50");
    CHECK(one.exit_code == 0);
    CHECK(one.output == two.output);
    CHECK(one.output.find("meta") == std::string::npos);
}

TEST_CASE("config file supplies defaults that flags override") {
    std::ofstream cfg(path("cfg.json"));
    cfg << "{\"family\": \"squares\", \"count\": 7}";
    cfg.close();
    auto r = run("spectrum --config " + path("cfg.json") + " --out " + path("cfgout.json"));
    CHECK(r.exit_code == 0);
    CHECK(nlohmann::json::parse(slurp(path("cfgout.json")))["points"].size() == 7);
    auto r2 = run("spectrum --config " + path("cfg.json") + " --count 9 --out " +
                  path("cfgout2.json"));
    CHECK(r2.exit_code == 0);
    CHECK(nlohmann::json::parse(slurp(path("cfgout2.json")))["points"].size() == 9);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-voltspec>\n");
        return 1;
    }
    g_cli = argv[1];
    char tmpl[] = "/tmp/voltspec_cli_XXXXXX";
    g_dir = mkdtemp(tmpl);
    doctest::Context ctx;
    return ctx.run();
}
