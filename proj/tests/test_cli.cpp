// tests/test_cli.cpp
//
// Drives the installed binary end to end through a shell. The binary path
// arrives in SPARSICODE_BIN (set by the test harness).
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

using json = nlohmann::json;

std::string bin_path() {
    const char* p = std::getenv("SPARSICODE_BIN");
    if (!p) throw std::runtime_error("SPARSICODE_BIN not set");
    return p;
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = bin_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf;
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() /
               ("sparsicode-cli-test-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const json& j) {
    auto path = scratch_dir() / name;
    std::ofstream out(path);
    out << j.dump();
    return path.string();
}

std::string tri_file() {
    return write_file("tri.json", json{{"length", 3}, {"codewords", {"110", "011", "101"}}});
}

} // namespace

TEST_CASE("nrd and cl report values with witnesses") {
    auto code = tri_file();
    auto r = run("nrd --code " + code);
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.output);
    REQUIRE(j["nrd"] == 2);
    REQUIRE(j["witness"]["indices"].size() == 2);

    auto r2 = run("cl --code " + code);
    REQUIRE(r2.exit_code == 0);
    auto j2 = json::parse(r2.output);
    REQUIRE(j2["cl"] == 2);

    auto r3 = run("vc --code " + code);
    REQUIRE(json::parse(r3.output)["vc"] == 1);
}

TEST_CASE("sparsify emits weights plus a verification report") {
    auto code = tri_file();
    auto r = run("sparsify --code " + code + " --eps 0.5 --method simple --seed 7");
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.output);
    REQUIRE(j["report"]["valid"] == true);
    REQUIRE(j["weights"]["length"] == 3);
    REQUIRE(j["metadata"]["seed"] == 7);
    REQUIRE(j["metadata"]["command"] == "sparsify");
}

TEST_CASE("verify rejects an out-of-band weight map with exit three") {
    auto code = tri_file();
    auto weights = write_file("skew.json",
                              json{{"length", 3}, {"weights", {{"0", 9.0}, {"1", 1.0}, {"2", 1.0}}}});
    auto r = run("verify --code " + code + " --weights " + weights + " --eps 0.5");
    REQUIRE(r.exit_code == 3);
    auto j = json::parse(r.output);
    REQUIRE(j["report"]["valid"] == false);
    REQUIRE(j["report"].contains("offending"));

    auto ones = write_file("ones.json",
                           json{{"length", 3}, {"weights", {{"0", 1.0}, {"1", 1.0}, {"2", 1.0}}}});
    auto ok = run("verify --code " + code + " --weights " + ones + " --eps 0.1");
    REQUIRE(ok.exit_code == 0);
}

TEST_CASE("missing files and bad arguments exit one") {
    REQUIRE(run("nrd --code /nonexistent/x.json").exit_code == 1);
    REQUIRE(run("frobnicate").exit_code == 1);
    REQUIRE(run("").exit_code == 1);
    auto code = tri_file();
    REQUIRE(run("sparsify --code " + code + " --eps 1.5").exit_code == 1);
    REQUIRE(run("sparsify --code " + code + " --eps 0.5 --method wat").exit_code == 1);
}

TEST_CASE("search caps exit two") {
    json wide;
    wide["length"] = 30;
    auto& ws = wide["codewords"] = json::array();
    for (int i = 0; i < 30; ++i) {
        std::string s(30, '0');
        s[static_cast<std::size_t>(i)] = '1';
        ws.push_back(s);
    }
    auto path = write_file("identity30.json", wide);
    REQUIRE(run("nrd --code " + path).exit_code == 2);
}

TEST_CASE("same seed, same bytes") {
    auto gen = run("gen random-code --m 40 --count 20 --density 0.4 --seed 5");
    REQUIRE(gen.exit_code == 0);
    REQUIRE(run("gen random-code --m 40 --count 20 --density 0.4 --seed 5").output == gen.output);

    auto code = write_file("rand.json", json::parse(gen.output)["code"]);
    const std::string args = "sparsify --code " + code + " --eps 0.4 --method entropy --seed 11";
    auto a = run(args);
    auto b = run(args);
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.output == b.output);

    // thread count must not leak into the report
    auto c = run(args + " --jobs 3");
    REQUIRE(c.output == a.output);
}

TEST_CASE("generated chain codes feed back into the analyzers") {
    auto r = run("gen chain-code --m 5");
    REQUIRE(r.exit_code == 0);
    auto code = write_file("chain5.json", json::parse(r.output)["code"]);
    REQUIRE(json::parse(run("cl --code " + code).output)["cl"] == 5);
    REQUIRE(json::parse(run("nrd --code " + code).output)["nrd"] == 1);
}

TEST_CASE("csp analyzers and the compiler work from catalog names") {
    auto r = run("csp-nrd --predicate cut --n 3");
    REQUIRE(r.exit_code == 0);
    REQUIRE(json::parse(r.output)["csp_nrd"] == 3);

    auto r2 = run("csp-cl --predicate eq --n 3");
    REQUIRE(r2.exit_code == 0);
    REQUIRE(json::parse(r2.output)["csp_cl"] == 3);

    auto inst = write_file("triangle.json",
                           json{{"n", 3}, {"clauses", {{0, 1}, {1, 2}, {2, 0}}}});
    auto r3 = run("compile --predicate eq --instance " + inst);
    REQUIRE(r3.exit_code == 0);
    auto compiled = json::parse(r3.output)["code"];
    REQUIRE(compiled["length"] == 3);
    REQUIRE(compiled["codewords"].size() == 4);

    REQUIRE(run("csp-nrd --predicate wat --n 3").exit_code == 1);
    REQUIRE(run("csp-nrd --predicate eq --n 40").exit_code == 2);
}

TEST_CASE("kernelize removes the implied equality edge") {
    auto inst = write_file("eqchain.json",
                           json{{"n", 3}, {"clauses", {{0, 1}, {1, 2}, {0, 2}}}});
    auto r = run("kernelize --predicate eq --instance " + inst);
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.output);
    REQUIRE(j["kept"] == 2);
    REQUIRE(j["removed"] == json::parse("[0]"));

    REQUIRE(run("kernelize --predicate cut --instance " + inst + " --mode structured")
                .exit_code == 1);
}

TEST_CASE("generated ensembles pass their own verifier") {
    auto r = run("gen 3lin-instance --p 3 --t 2 --emit both");
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.output);
    REQUIRE(j["instance"]["n"] == 12);
    REQUIRE(j["instance"]["clauses"].size() == 8);
    REQUIRE(j["assignments"].size() == 8);
    REQUIRE(j["predicate"] == "3lin*:p=3");

    auto ens = write_file("e32.json", j["ensemble"]);
    auto v = run("ensemble-verify --ensemble " + ens);
    REQUIRE(v.exit_code == 0);
    REQUIRE(json::parse(v.output)["ok"] == true);
}

TEST_CASE("group code generation is seeded and parseable") {
    auto r = run("gen group-code --moduli 2,4 --m 6 --seed 1");
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.output);
    REQUIRE(j["code"]["length"] == 6);
    REQUIRE(j["subgroup_order"].get<std::size_t>() >= 1);
    REQUIRE(run("gen group-code --moduli 2,4 --m 6 --seed 1").output == r.output);

    auto p = run("gen predicate --name 3lin*:p=3");
    REQUIRE(json::parse(p.output)["predicate"]["tuples"].size() == 8);
}

TEST_CASE("bench prints one CSV row per code") {
    auto code = tri_file();
    auto r = run("bench " + code + " " + code + " --eps 0.5 --no-timing");
    REQUIRE(r.exit_code == 0);
    std::size_t lines = 0;
    for (char ch : r.output)
        if (ch == '\n') ++lines;
    REQUIRE(lines == 3);   // header + two rows
    REQUIRE(r.output.rfind("m,codewords,nrd,cl,support_simple,support_entropy,runtime_ms\n", 0) == 0);
    REQUIRE(r.output.find("3,3,2,2,") != std::string::npos);
    // --no-timing zeroes the runtime column for byte-stable output
    REQUIRE(run("bench " + code + " " + code + " --eps 0.5 --no-timing").output == r.output);
}
