// sparsicode/json_io.hpp
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sparsicode/code.hpp"
#include "sparsicode/common.hpp"
#include "sparsicode/csp.hpp"
#include "sparsicode/ensemble.hpp"
#include "sparsicode/entropy.hpp"
#include "sparsicode/sparsify.hpp"

namespace sparsicode::io {

using json = nlohmann::json;

// Codes: {"length": m, "codewords": ["0110", ...]}, coordinate 0 leftmost.
inline json code_to_json(const BinaryCode& code) {
    json j;
    j["length"] = code.length();
    auto& ws = j["codewords"] = json::array();
    for (const auto& c : code.words()) ws.push_back(c.to_string());
    return j;
}

inline BinaryCode code_from_json(const json& j) {
    if (!j.is_object() || !j.contains("length") || !j.contains("codewords"))
        throw input_error("code JSON: need {\"length\", \"codewords\"}");
    const auto m = j.at("length").get<std::size_t>();
    std::vector<BitVec> words;
    for (const auto& s : j.at("codewords")) {
        BitVec c = BitVec::from_string(s.get<std::string>());
        if (c.length() != m) throw input_error("code JSON: codeword length mismatch");
        words.push_back(std::move(c));
    }
    return BinaryCode(m, std::move(words));
}

// Weights: {"length": m, "weights": {"3": 3.0, ...}} with string keys.
inline json weights_to_json(const WeightMap& w) {
    json j;
    j["length"] = w.length();
    json entries = json::object();
    for (const auto& [i, v] : w.entries()) entries[std::to_string(i)] = v;
    j["weights"] = std::move(entries);
    return j;
}

inline WeightMap weights_from_json(const json& j) {
    if (!j.is_object() || !j.contains("length") || !j.contains("weights"))
        throw input_error("weights JSON: need {\"length\", \"weights\"}");
    WeightMap w(j.at("length").get<std::size_t>());
    for (const auto& [key, val] : j.at("weights").items()) {
        std::size_t i = 0;
        try {
            i = static_cast<std::size_t>(std::stoull(key));
        } catch (const std::exception&) {
            throw input_error("weights JSON: non-integer coordinate key '" + key + "'");
        }
        w.set(i, val.get<double>());
    }
    return w;
}

// Predicates: {"domain": d, "arity": r, "tuples": [[...], ...]} or a catalog
// string such as "3lin*:p=3".
inline json predicate_to_json(const Predicate& R) {
    json j;
    j["domain"] = R.domain_size();
    j["arity"] = R.arity();
    j["tuples"] = R.tuples();
    return j;
}

inline Predicate predicate_from_json(const json& j) {
    if (j.is_string()) return parse_predicate(j.get<std::string>());
    if (!j.is_object() || !j.contains("domain") || !j.contains("arity") || !j.contains("tuples"))
        throw input_error("predicate JSON: need {\"domain\", \"arity\", \"tuples\"} or a catalog name");
    return Predicate(j.at("domain").get<int>(), j.at("arity").get<int>(),
                     j.at("tuples").get<std::vector<Tuple>>());
}

// Instances: {"n": n, "clauses": [[...], ...]}.
inline json instance_to_json(const CspInstance& inst) {
    json j;
    j["n"] = inst.n;
    j["clauses"] = inst.clauses;
    return j;
}

inline CspInstance instance_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("clauses"))
        throw input_error("instance JSON: need {\"n\", \"clauses\"}");
    CspInstance inst;
    inst.n = j.at("n").get<std::size_t>();
    inst.clauses = j.at("clauses").get<std::vector<std::vector<std::size_t>>>();
    return inst;
}

inline json ensemble_to_json(const Ensemble& E) {
    json j;
    j["p"] = E.p;
    j["dim"] = E.dim;
    j["vectors"] = E.vectors;
    auto& es = j["edges"] = json::array();
    for (const auto& e : E.edges) es.push_back({e[0], e[1], e[2]});
    j["functionals"] = E.functionals;
    return j;
}

inline Ensemble ensemble_from_json(const json& j) {
    if (!j.is_object())
        throw input_error("ensemble JSON: need {\"p\", \"dim\", \"vectors\", \"edges\", \"functionals\"}");
    Ensemble E;
    E.p = j.at("p").get<int>();
    E.dim = j.at("dim").get<std::size_t>();
    E.vectors = j.at("vectors").get<std::vector<std::vector<int>>>();
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3)
            throw input_error("ensemble JSON: edges must be index triples");
        E.edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<std::size_t>()});
    }
    E.functionals = j.at("functionals").get<std::vector<std::vector<int>>>();
    E.validate();
    return E;
}

inline json index_set_to_json(const IndexSet& I) { return json(I.indices()); }

inline json chain_to_json(const Chain& chain) {
    json j;
    j["coords"] = chain.coords;
    auto& ws = j["words"] = json::array();
    for (const auto& w : chain.words) ws.push_back(w.to_string());
    return j;
}

inline json nrd_witness_to_json(const NonRedundancyWitness& w) {
    json j;
    j["indices"] = w.indices.indices();
    auto& ws = j["words"] = json::array();
    for (const auto& c : w.words) ws.push_back(c.to_string());
    return j;
}

inline json report_to_json(const SparsifyReport& rep) {
    json j;
    j["valid"] = rep.valid;
    j["worst_ratio_low"] = rep.worst_ratio_low;
    j["worst_ratio_high"] = rep.worst_ratio_high;
    j["support_size"] = rep.support_size;
    if (rep.offending) j["offending"] = rep.offending->to_string();
    return j;
}

inline json decomposition_to_json(const Decomposition& dec) {
    json j;
    j["I"] = dec.I.indices();
    j["case"] = dec.case_used;
    j["d"] = dec.d;
    j["lambda"] = dec.lambda;
    j["seed"] = dec.seed;
    j["nrd_used"] = dec.nrd_used;
    j["removed_counts"] = dec.removed_counts;
    j["residual"] = code_to_json(dec.residual);
    const double theta = dec.d > 0 ? dec.lambda * static_cast<double>(dec.nrd_used) / dec.d : 0.0;
    auto& tr = j["trace"] = json::array();
    for (const auto& st : dec.trace) {
        json e;
        e["theta"] = theta;
        e["removed"] = st.removed;
        e["sampled_coordinate"] = st.sampled_coord;
        e["f"] = st.f_before.str();
        tr.push_back(std::move(e));
    }
    return j;
}

} // namespace sparsicode::io
