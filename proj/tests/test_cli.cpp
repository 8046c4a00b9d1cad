#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "helpers.hpp"
#include "sg/report.hpp"
#include "sg/transforms.hpp"

using namespace sg;
using namespace sg::test;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout
    std::string errors;  // stderr
};

RunResult run(const std::string& args) {
    const std::string out_file = std::string(SG_TEST_TMPDIR) + "/cli_out.txt";
    const std::string err_file = std::string(SG_TEST_TMPDIR) + "/cli_err.txt";
    const std::string cmd = std::string(SGSOLVE_BINARY) + " " + args + " > " + out_file +
                            " 2> " + err_file;
    int status = std::system(cmd.c_str());
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    return RunResult{WEXITSTATUS(status), slurp(out_file), slurp(err_file)};
}

std::string write_model(const std::string& name, const Game& game) {
    const std::string path = std::string(SG_TEST_TMPDIR) + "/" + name;
    std::ofstream out(path);
    out << render_game(game);
    return path;
}

}  // namespace

TEST_CASE("solve emits the coin value and a valid schema") {
    const std::string path = write_model("coin.sg", coin_game());
    RunResult r = run("solve --method si --json " + path);
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.output);
    std::string why;
    REQUIRE(validate_result_json(doc, &why));
    CHECK(doc["initial_value"].get<double>() == 0.5);
    CHECK(doc["values_exact"][0] == "1/2");
    CHECK(doc["method"] == "si");
    CHECK(doc["guarantee"] == "exact");
}

TEST_CASE("every solve method agrees on the scalable MEC model") {
    const std::string path = write_model("bigmec3.sg", make_bigmec(3));
    for (const char* flags :
         {"--method si", "--method si --init attractor", "--method si --opponent vi",
          "--method si --topological", "--method qp", "--method qp --warm-start vi"}) {
        RunResult r = run("solve " + std::string(flags) + " --json " + path);
        REQUIRE(r.exit_code == 0);
        json doc = json::parse(r.output);
        std::string why;
        REQUIRE(validate_result_json(doc, &why));
        CHECK(doc["initial_value"].get<double>() == doctest::Approx(0.4).epsilon(1e-6));
    }
}

TEST_CASE("unguaranteed value iteration is labeled as such") {
    const std::string path = write_model("coin2.sg", coin_game());
    RunResult r = run("solve --method vi --json " + path);
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.output);
    CHECK(doc["guarantee"] == "unguaranteed");
    CHECK(doc["method"] == "vi");
}

TEST_CASE("malformed input exits with code 2 and a line number") {
    const std::string path = std::string(SG_TEST_TMPDIR) + "/broken.sg";
    std::ofstream(path) << "sg\nstate 0 max\nbogus line\n";
    RunResult r = run("solve " + path);
    CHECK(r.exit_code == 2);
    CHECK(r.errors.find("line 3") != std::string::npos);
    RunResult missing = run("solve /nonexistent.sg");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("oracle subcommand prints exact fractions") {
    const std::string path = write_model("bigmec1.sg", make_bigmec(1));
    RunResult r = run("oracle " + path);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("2/5") != std::string::npos);
    RunResult j = run("oracle --json " + path);
    json doc = json::parse(j.output);
    CHECK(doc["values_exact"][0] == "2/5");
}

TEST_CASE("mec subcommand reports components and postorder") {
    const std::string path = write_model("bigmec2.sg", make_bigmec(2));
    RunResult r = run("mec --json " + path);
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.output);
    REQUIRE(doc["mecs"].size() == 3);
    CHECK(doc["mecs"][0]["states"] == json({1, 2, 3, 4}));
    CHECK(doc["mecs"][0]["absorbing"] == false);
    CHECK(doc.contains("postorder"));
}

TEST_CASE("gen is reproducible through the CLI") {
    RunResult a = run("gen --states 5 --seed 42");
    RunResult b = run("gen --states 5 --seed 42");
    REQUIRE(a.exit_code == 0);
    CHECK(a.output == b.output);
    // And the output parses back.
    CHECK(parse_game(a.output).num_states() == 7);
}

TEST_CASE("transform writes a normal-form model plus origin map") {
    const std::string path = write_model("bigmec1b.sg", make_bigmec(1));
    const std::string out = std::string(SG_TEST_TMPDIR) + "/bigmec1b.cnf.sg";
    RunResult r = run("transform --to-cnf -o " + out + " " + path);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    Game cnf = parse_game(ss.str());
    CHECK(cnf.num_states() > 5);
    std::ifstream origin_in(out + ".origin.json");
    json origin = json::parse(origin_in);
    CHECK(origin["origin"].size() == static_cast<size_t>(cnf.num_states()));
    CHECK(origin["origin"][0] == 0);
}

TEST_CASE("export-qp writes an LP file") {
    const std::string path = write_model("coin3.sg", coin_game());
    const std::string out = std::string(SG_TEST_TMPDIR) + "/coin3.lp";
    RunResult r = run("export-qp --variant improved --format lp -o " + out + " " + path);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("Minimize") != std::string::npos);
    CHECK(ss.str().find("End") != std::string::npos);
}

TEST_CASE("an exhausted QP solver exits with code 1") {
    // Condon's program over the epsilon-chained MEC model is exactly the
    // instance the local solver cannot certify.
    Game cnf = to_condon_normal_form(make_bigmec(1), 9, true).game;
    const std::string path = write_model("bigmec1_cnf.sg", cnf);
    RunResult r = run("solve --method qp --restarts 4 --json " + path);
    CHECK(r.exit_code == 1);
    json doc = json::parse(r.output);
    CHECK(doc["guarantee"] == "unguaranteed");
    CHECK(doc["stats"]["converged"] == false);
    CHECK(doc.contains("qp_report"));
    CHECK(doc["qp_report"]["objective"].get<double>() > 1e-9);
}

TEST_CASE("check cross-validates a small random batch") {
    RunResult r = run("check --random 4 --seed 11 --json");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.output);
    CHECK(doc["disagreements"] == 0);
    CHECK(doc["models"].size() == 4);
}
