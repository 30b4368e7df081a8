#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "certilasso/condition.hpp"
#include "certilasso/select.hpp"

namespace certilasso {

// FNV-1a, used as the input-file digest in run reports.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Rationals serialise as exact strings plus a decimal convenience rendering.
inline nlohmann::json json_rational(const Rational& r) {
    nlohmann::json j;
    j["exact"] = rational_to_string(r);
    j["decimal"] = rational_to_decimal(r);
    return j;
}

inline Rational rational_from_json(const nlohmann::json& j) {
    return rational_from_string(j.at("exact").get<std::string>());
}

inline std::vector<int> one_based(const std::vector<int>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(i + 1);
    return out;
}

struct IterationTrace {
    long n = 0;
    std::string delta;
    std::string threshold_C;
    bool sigma_leq_C2 = true;
    bool degenerate = false;
    std::vector<int> support;  // 1-based in reports
};

struct RunReport {
    std::string command;
    std::string input_digest;
    std::string outcome;  // "certified" | "budget-exhausted" | "witness"
    std::vector<int> support;  // 1-based; meaningful when certified
    std::string eta_exact;
    std::string eta_decimal;
    long iterations = 0;
    unsigned long max_precision_bits = 0;
    std::string exhausted_reason;
    std::vector<IterationTrace> trace;
    double timing_ms = 0;
};

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j;
    j["command"] = r.command;
    j["input_digest"] = r.input_digest;
    j["outcome"] = r.outcome;
    j["iterations"] = r.iterations;
    j["max_precision_bits"] = r.max_precision_bits;
    j["timing_ms"] = r.timing_ms;
    if (r.outcome == "certified") {
        j["support"] = r.support;
        j["eta"] = {{"exact", r.eta_exact}, {"decimal", r.eta_decimal}};
    }
    if (!r.exhausted_reason.empty()) j["reason"] = r.exhausted_reason;
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& t : r.trace) {
        nlohmann::json e;
        e["n"] = t.n;
        e["delta"] = t.delta;
        e["C"] = t.threshold_C;
        e["sigma_leq_C2"] = t.sigma_leq_C2;
        e["degenerate"] = t.degenerate;
        e["support"] = t.support;
        tr.push_back(e);
    }
    j["trace"] = tr;
    return j;
}

inline RunReport run_report_from_json(const nlohmann::json& j) {
    RunReport r;
    r.command = j.at("command").get<std::string>();
    r.input_digest = j.at("input_digest").get<std::string>();
    r.outcome = j.at("outcome").get<std::string>();
    r.iterations = j.at("iterations").get<long>();
    r.max_precision_bits = j.at("max_precision_bits").get<unsigned long>();
    r.timing_ms = j.at("timing_ms").get<double>();
    if (j.contains("support")) r.support = j.at("support").get<std::vector<int>>();
    if (j.contains("eta")) {
        r.eta_exact = j.at("eta").at("exact").get<std::string>();
        r.eta_decimal = j.at("eta").at("decimal").get<std::string>();
    }
    if (j.contains("reason")) r.exhausted_reason = j.at("reason").get<std::string>();
    for (const auto& e : j.at("trace")) {
        IterationTrace t;
        t.n = e.at("n").get<long>();
        t.delta = e.at("delta").get<std::string>();
        t.threshold_C = e.at("C").get<std::string>();
        t.sigma_leq_C2 = e.at("sigma_leq_C2").get<bool>();
        t.degenerate = e.at("degenerate").get<bool>();
        t.support = e.at("support").get<std::vector<int>>();
        r.trace.push_back(std::move(t));
    }
    return r;
}

inline bool operator==(const IterationTrace& a, const IterationTrace& b) {
    return a.n == b.n && a.delta == b.delta && a.threshold_C == b.threshold_C &&
           a.sigma_leq_C2 == b.sigma_leq_C2 && a.degenerate == b.degenerate &&
           a.support == b.support;
}

inline bool operator==(const RunReport& a, const RunReport& b) {
    return a.command == b.command && a.input_digest == b.input_digest && a.outcome == b.outcome &&
           a.support == b.support && a.eta_exact == b.eta_exact &&
           a.eta_decimal == b.eta_decimal && a.iterations == b.iterations &&
           a.max_precision_bits == b.max_precision_bits &&
           a.exhausted_reason == b.exhausted_reason && a.trace == b.trace &&
           a.timing_ms == b.timing_ms;
}

}  // namespace certilasso
