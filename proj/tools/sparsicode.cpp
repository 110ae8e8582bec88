// tools/sparsicode.cpp
//
// Command-line surface for the sparsicode library. JSON in, JSON out (CSV
// for bench); exit codes: 0 success, 1 invalid input, 2 budget exhaustion,
// 3 verification failure.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sparsicode/code.hpp"
#include "sparsicode/common.hpp"
#include "sparsicode/csp.hpp"
#include "sparsicode/ensemble.hpp"
#include "sparsicode/entropy.hpp"
#include "sparsicode/json_io.hpp"
#include "sparsicode/rng.hpp"
#include "sparsicode/sparsify.hpp"

namespace {

using namespace sparsicode;
using sparsicode::io::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("failed to parse '" + path + "': " + std::string(e.what()));
    }
}

json run_metadata(const std::string& command, std::uint64_t seed) {
    return json{{"command", command}, {"generator", Rng::kName}, {"seed", seed}};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// Deterministic parallel verification: contiguous slices, merged in slice
// order so the first offending codeword is independent of thread timing.
SparsifyReport verify_parallel(const BinaryCode& code, const WeightMap& w, double eps,
                               const std::optional<WeightMap>& base, unsigned jobs) {
    if (jobs <= 1 || code.size() < std::size_t{2} * jobs)
        return verify_sparsifier(code, w, eps, base);
    const std::size_t n = code.size();
    const std::size_t chunk = (n + jobs - 1) / jobs;
    std::vector<SparsifyReport> parts(jobs);
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < jobs; ++t) {
        threads.emplace_back([&, t]() {
            const std::size_t lo = std::min(n, t * chunk);
            const std::size_t hi = std::min(n, lo + chunk);
            std::vector<BitVec> slice(code.words().begin() + static_cast<std::ptrdiff_t>(lo),
                                      code.words().begin() + static_cast<std::ptrdiff_t>(hi));
            parts[t] = verify_sparsifier(BinaryCode(code.length(), std::move(slice)), w, eps, base);
        });
    }
    for (auto& th : threads) th.join();
    SparsifyReport out;
    out.support_size = w.support_size();
    for (const auto& part : parts) {
        out.valid = out.valid && part.valid;
        out.worst_ratio_low = std::min(out.worst_ratio_low, part.worst_ratio_low);
        out.worst_ratio_high = std::max(out.worst_ratio_high, part.worst_ratio_high);
        if (!out.offending && part.offending) out.offending = part.offending;
    }
    return out;
}

struct Options {
    std::string code_path;
    std::string weights_path;
    std::string base_path;
    std::string instance_path;
    std::string ensemble_path;
    std::string predicate;
    std::string method = "simple";
    std::string mode = "exact";
    std::string emit_what = "instance";
    std::string moduli = "2";
    std::string name;
    std::vector<std::string> bench_codes;
    double eps = 0.5;
    double density = 0.5;
    std::uint64_t seed = 0;
    std::uint64_t n = 0;
    std::uint64_t m = 0;
    std::uint64_t count = 0;
    std::uint64_t num_generators = 2;
    std::uint64_t nrd_bound = 0;
    int p = 3;
    int t = 1;
    unsigned jobs = 1;
    bool no_timing = false;
};

std::vector<int> parse_int_csv(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw input_error("expected comma-separated integers, got '" + s + "'");
        }
    }
    if (out.empty()) throw input_error("expected comma-separated integers, got '" + s + "'");
    return out;
}

BinaryCode staircase_code(std::size_t m) {
    if (m == 0) throw input_error("chain-code: m must be positive");
    std::vector<BitVec> words;
    for (std::size_t k = 1; k <= m; ++k) {
        BitVec c(m);
        for (std::size_t i = 0; i < k; ++i) c.set(i, true);
        words.push_back(std::move(c));
    }
    return BinaryCode(m, std::move(words));
}

int exit_code_for_report(const SparsifyReport& rep) { return rep.valid ? 0 : 3; }

int cmd_nrd(const Options& opt) {
    auto code = io::code_from_json(read_json_file(opt.code_path));
    auto r = nrd_exact(code);
    emit(json{{"nrd", r.value}, {"witness", io::nrd_witness_to_json(r.witness)}});
    return 0;
}

int cmd_cl(const Options& opt) {
    auto code = io::code_from_json(read_json_file(opt.code_path));
    auto r = chain_length_exact(code);
    emit(json{{"cl", r.value}, {"witness", io::chain_to_json(r.witness)}});
    return 0;
}

int cmd_vc(const Options& opt) {
    auto code = io::code_from_json(read_json_file(opt.code_path));
    emit(json{{"vc", vc_dimension(code)}});
    return 0;
}

int cmd_or_closure(const Options& opt) {
    auto code = io::code_from_json(read_json_file(opt.code_path));
    auto closure = or_closure(code);
    emit(json{{"closure", io::code_to_json(closure)}, {"size", closure.size()}});
    return 0;
}

int cmd_hitting_set(const Options& opt) {
    auto code = io::code_from_json(read_json_file(opt.code_path));
    auto hs = minimal_hitting_set(code);
    emit(json{{"indices", hs.indices()}, {"size", hs.size()}});
    return 0;
}

int cmd_sparsify(const Options& opt) {
    auto code = io::code_from_json(read_json_file(opt.code_path));
    std::optional<std::size_t> bound;
    if (opt.nrd_bound > 0) bound = static_cast<std::size_t>(opt.nrd_bound);
    WeightMap w(code.length());
    if (opt.method == "simple") w = simple_sparsifier(code, opt.eps, opt.seed);
    else if (opt.method == "entropy") w = entropy_sparsifier(code, opt.eps, opt.seed, bound);
    else throw input_error("sparsify: unknown method '" + opt.method + "'");
    auto rep = verify_parallel(code, w, opt.eps, std::nullopt, opt.jobs);
    emit(json{{"weights", io::weights_to_json(w)},
              {"report", io::report_to_json(rep)},
              {"metadata", run_metadata("sparsify", opt.seed)}});
    return exit_code_for_report(rep);
}

int cmd_wsparsify(const Options& opt) {
    auto code = io::code_from_json(read_json_file(opt.code_path));
    auto zeta = io::weights_from_json(read_json_file(opt.weights_path));
    auto w = weighted_sparsifier(code, zeta, opt.eps, opt.seed);
    auto rep = verify_parallel(code, w, opt.eps, zeta, opt.jobs);
    emit(json{{"weights", io::weights_to_json(w)},
              {"report", io::report_to_json(rep)},
              {"metadata", run_metadata("wsparsify", opt.seed)}});
    return exit_code_for_report(rep);
}

int cmd_verify(const Options& opt) {
    auto code = io::code_from_json(read_json_file(opt.code_path));
    auto w = io::weights_from_json(read_json_file(opt.weights_path));
    std::optional<WeightMap> base;
    if (!opt.base_path.empty()) base = io::weights_from_json(read_json_file(opt.base_path));
    auto rep = verify_parallel(code, w, opt.eps, base, opt.jobs);
    emit(json{{"report", io::report_to_json(rep)}});
    return exit_code_for_report(rep);
}

int cmd_csp_nrd(const Options& opt) {
    auto R = parse_predicate(opt.predicate);
    auto r = csp_nrd(R, static_cast<std::size_t>(opt.n));
    emit(json{{"csp_nrd", r.value},
              {"instance", io::instance_to_json(r.instance)},
              {"witnesses", r.witnesses}});
    return 0;
}

int cmd_csp_cl(const Options& opt) {
    auto R = parse_predicate(opt.predicate);
    auto r = csp_chain_length(R, static_cast<std::size_t>(opt.n));
    emit(json{{"csp_cl", r.value}, {"clauses", r.clauses}, {"witnesses", r.witnesses}});
    return 0;
}

int cmd_compile(const Options& opt) {
    auto R = parse_predicate(opt.predicate);
    auto inst = io::instance_from_json(read_json_file(opt.instance_path));
    emit(json{{"code", io::code_to_json(satisfiability_code(R, inst))}});
    return 0;
}

int cmd_kernelize(const Options& opt) {
    auto R = parse_predicate(opt.predicate);
    auto inst = io::instance_from_json(read_json_file(opt.instance_path));
    KernelizeMode mode;
    if (opt.mode == "exact") mode = KernelizeMode::exact;
    else if (opt.mode == "structured") mode = KernelizeMode::structured;
    else throw input_error("kernelize: unknown mode '" + opt.mode + "'");
    auto r = kernelize(R, inst, mode);
    emit(json{{"kernel", io::instance_to_json(r.kernel)},
              {"removed", r.removed},
              {"kept", r.kernel.clauses.size()}});
    return 0;
}

int cmd_ensemble_verify(const Options& opt) {
    auto E = io::ensemble_from_json(read_json_file(opt.ensemble_path));
    auto check = verify_ensemble(E);
    emit(json{{"ok", check.ok}, {"violation", check.violation}});
    return 0;
}

int cmd_gen_3lin(const Options& opt) {
    auto E = construct_3lin(opt.p, opt.t);
    json out;
    if (opt.emit_what == "instance" || opt.emit_what == "both") {
        auto ei = ensemble_to_instance(E);
        out["instance"] = io::instance_to_json(ei.instance);
        out["assignments"] = ei.assignments;
        out["predicate"] = "3lin*:p=" + std::to_string(opt.p);
    }
    if (opt.emit_what == "ensemble" || opt.emit_what == "both")
        out["ensemble"] = io::ensemble_to_json(E);
    if (out.empty()) throw input_error("gen 3lin-instance: --emit must be instance|ensemble|both");
    emit(out);
    return 0;
}

int cmd_gen_chain(const Options& opt) {
    emit(json{{"code", io::code_to_json(staircase_code(static_cast<std::size_t>(opt.m)))}});
    return 0;
}

int cmd_gen_random(const Options& opt) {
    if (opt.m == 0 || opt.count == 0) throw input_error("random-code: need --m and --count");
    if (!(opt.density > 0.0 && opt.density < 1.0))
        throw input_error("random-code: density must lie in (0,1)");
    Rng rng(opt.seed);
    std::vector<BitVec> words;
    for (std::uint64_t k = 0; k < opt.count; ++k) {
        BitVec c(static_cast<std::size_t>(opt.m));
        for (std::size_t i = 0; i < opt.m; ++i) c.set(i, rng.bernoulli(opt.density));
        words.push_back(std::move(c));
    }
    BinaryCode code(static_cast<std::size_t>(opt.m), std::move(words));
    emit(json{{"code", io::code_to_json(code)},
              {"metadata", run_metadata("gen random-code", opt.seed)}});
    return 0;
}

int cmd_gen_group(const Options& opt) {
    if (opt.m == 0) throw input_error("group-code: need --m");
    auto moduli = parse_int_csv(opt.moduli);
    std::uint64_t order = 1;
    for (int q : moduli) {
        if (q < 1) throw input_error("group-code: moduli must be positive");
        order *= static_cast<std::uint64_t>(q);
    }
    Rng rng(opt.seed);
    std::vector<std::vector<int>> gens;
    for (std::uint64_t g = 0; g < opt.num_generators; ++g) {
        std::vector<int> gen(static_cast<std::size_t>(opt.m));
        for (auto& e : gen) e = static_cast<int>(rng.below(order));
        gens.push_back(std::move(gen));
    }
    auto r = group_code(moduli, static_cast<std::size_t>(opt.m), gens);
    emit(json{{"code", io::code_to_json(r.code)},
              {"subgroup_order", r.subgroup_order},
              {"metadata", run_metadata("gen group-code", opt.seed)}});
    return 0;
}

int cmd_gen_predicate(const Options& opt) {
    emit(json{{"predicate", io::predicate_to_json(parse_predicate(opt.name))}});
    return 0;
}

int cmd_bench(const Options& opt) {
    struct Row {
        std::string text;
    };
    std::vector<Row> rows(opt.bench_codes.size());
    auto work = [&](std::size_t idx) {
        const auto& path = opt.bench_codes[idx];
        auto code = io::code_from_json(read_json_file(path));
        const auto start = std::chrono::steady_clock::now();
        auto nrd = nrd_exact(code);
        auto cl = chain_length_exact(code);
        auto ws = simple_sparsifier(code, opt.eps, opt.seed);
        auto we = entropy_sparsifier(code, opt.eps, opt.seed);
        const auto stop = std::chrono::steady_clock::now();
        std::uint64_t ms = opt.no_timing
            ? 0
            : static_cast<std::uint64_t>(
                  std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count());
        std::ostringstream line;
        line << code.length() << ',' << code.size() << ',' << nrd.value << ',' << cl.value << ','
             << ws.support_size() << ',' << we.support_size() << ',' << ms;
        rows[idx].text = line.str();
    };
    if (opt.jobs <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) work(i);
    } else {
        std::vector<std::thread> threads;
        std::atomic<std::size_t> next{0};
        for (unsigned t = 0; t < opt.jobs; ++t)
            threads.emplace_back([&]() {
                for (std::size_t i = next.fetch_add(1); i < rows.size(); i = next.fetch_add(1))
                    work(i);
            });
        for (auto& th : threads) th.join();
    }
    std::cout << "m,codewords,nrd,cl,support_simple,support_entropy,runtime_ms\n";
    for (const auto& row : rows) std::cout << row.text << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"non-linear code and CSP sparsification toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    auto add_code = [&](CLI::App* sub) {
        sub->add_option("--code", opt.code_path, "code JSON file")->required();
    };

    auto* nrd = app.add_subcommand("nrd", "largest non-redundant coordinate set");
    add_code(nrd);
    nrd->callback([&]() { rc = cmd_nrd(opt); });

    auto* cl = app.add_subcommand("cl", "chain length");
    add_code(cl);
    cl->callback([&]() { rc = cmd_cl(opt); });

    auto* vc = app.add_subcommand("vc", "VC dimension of the codeword set system");
    add_code(vc);
    vc->callback([&]() { rc = cmd_vc(opt); });

    auto* orc = app.add_subcommand("or-closure", "closure under coordinatewise OR");
    add_code(orc);
    orc->callback([&]() { rc = cmd_or_closure(opt); });

    auto* hs = app.add_subcommand("hitting-set", "inclusion-minimal support hitting set");
    add_code(hs);
    hs->callback([&]() { rc = cmd_hitting_set(opt); });

    auto* sp = app.add_subcommand("sparsify", "build and verify a sparsifier");
    add_code(sp);
    sp->add_option("--eps", opt.eps, "accuracy in (0,1)")->required();
    sp->add_option("--method", opt.method, "simple|entropy")->capture_default_str();
    sp->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
    sp->add_option("--nrd-bound", opt.nrd_bound, "optional NRD upper bound for entropy method");
    sp->add_option("--jobs", opt.jobs, "verification threads")->capture_default_str();
    sp->callback([&]() { rc = cmd_sparsify(opt); });

    auto* wsp = app.add_subcommand("wsparsify", "weighted sparsifier");
    add_code(wsp);
    wsp->add_option("--weights", opt.weights_path, "base weights JSON file")->required();
    wsp->add_option("--eps", opt.eps, "accuracy in (0,1)")->required();
    wsp->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
    wsp->add_option("--jobs", opt.jobs, "verification threads")->capture_default_str();
    wsp->callback([&]() { rc = cmd_wsparsify(opt); });

    auto* ver = app.add_subcommand("verify", "verify a weight map against a code");
    add_code(ver);
    ver->add_option("--weights", opt.weights_path, "weights JSON file")->required();
    ver->add_option("--eps", opt.eps, "accuracy in (0,1)")->required();
    ver->add_option("--base", opt.base_path, "optional base weights JSON file");
    ver->add_option("--jobs", opt.jobs, "verification threads")->capture_default_str();
    ver->callback([&]() { rc = cmd_verify(opt); });

    auto* cnrd = app.add_subcommand("csp-nrd", "largest non-redundant instance");
    cnrd->add_option("--predicate", opt.predicate, "catalog name, e.g. 3lin*:p=3")->required();
    cnrd->add_option("--n", opt.n, "variable count")->required();
    cnrd->callback([&]() { rc = cmd_csp_nrd(opt); });

    auto* ccl = app.add_subcommand("csp-cl", "CSP chain length");
    ccl->add_option("--predicate", opt.predicate, "catalog name")->required();
    ccl->add_option("--n", opt.n, "variable count")->required();
    ccl->callback([&]() { rc = cmd_csp_cl(opt); });

    auto* comp = app.add_subcommand("compile", "satisfiability code of an instance");
    comp->add_option("--predicate", opt.predicate, "catalog name")->required();
    comp->add_option("--instance", opt.instance_path, "instance JSON file")->required();
    comp->callback([&]() { rc = cmd_compile(opt); });

    auto* ker = app.add_subcommand("kernelize", "remove implied clauses");
    ker->add_option("--predicate", opt.predicate, "catalog name")->required();
    ker->add_option("--instance", opt.instance_path, "instance JSON file")->required();
    ker->add_option("--mode", opt.mode, "exact|structured")->capture_default_str();
    ker->callback([&]() { rc = cmd_kernelize(opt); });

    auto* env = app.add_subcommand("ensemble-verify", "check ensemble invariants");
    env->add_option("--ensemble", opt.ensemble_path, "ensemble JSON file")->required();
    env->callback([&]() { rc = cmd_ensemble_verify(opt); });

    auto* gen = app.add_subcommand("gen", "generators");
    gen->require_subcommand(1);

    auto* g3 = gen->add_subcommand("3lin-instance", "three-block ensemble instance");
    g3->add_option("--p", opt.p, "prime modulus >= 3")->required();
    g3->add_option("--t", opt.t, "block size")->required();
    g3->add_option("--emit", opt.emit_what, "instance|ensemble|both")->capture_default_str();
    g3->callback([&]() { rc = cmd_gen_3lin(opt); });

    auto* gch = gen->add_subcommand("chain-code", "staircase code of length m");
    gch->add_option("--m", opt.m, "length")->required();
    gch->callback([&]() { rc = cmd_gen_chain(opt); });

    auto* grc = gen->add_subcommand("random-code", "seeded random code");
    grc->add_option("--m", opt.m, "length")->required();
    grc->add_option("--count", opt.count, "words to sample")->required();
    grc->add_option("--density", opt.density, "bit density")->capture_default_str();
    grc->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
    grc->callback([&]() { rc = cmd_gen_random(opt); });

    auto* ggc = gen->add_subcommand("group-code", "seeded random subgroup code");
    ggc->add_option("--moduli", opt.moduli, "cyclic factors, comma-separated")->required();
    ggc->add_option("--m", opt.m, "coordinates")->required();
    ggc->add_option("--num-generators", opt.num_generators, "generator count")->capture_default_str();
    ggc->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
    ggc->callback([&]() { rc = cmd_gen_group(opt); });

    auto* gpr = gen->add_subcommand("predicate", "catalog predicate tuples");
    gpr->add_option("--name", opt.name, "catalog name, e.g. lin:k=5,m=6,S=0|1")->required();
    gpr->callback([&]() { rc = cmd_gen_predicate(opt); });

    auto* bench = app.add_subcommand("bench", "CSV: size vs NRD/CL vs sparsifier support");
    bench->add_option("codes", opt.bench_codes, "code JSON files")->required();
    bench->add_option("--eps", opt.eps, "accuracy in (0,1)")->capture_default_str();
    bench->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
    bench->add_option("--jobs", opt.jobs, "worker threads")->capture_default_str();
    bench->add_flag("--no-timing", opt.no_timing, "suppress runtime column for byte-stable output");
    bench->callback([&]() { rc = cmd_bench(opt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const budget_error& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return 2;
    } catch (const verify_error& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
