// sparsicode/common.hpp
#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace sparsicode {

// Thrown when an exact search, closure, or enumeration exceeds its configured
// budget. Callers get an explicit failure, never a silent approximation.
class budget_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a constructed object fails its mandatory re-verification.
class verify_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract input.
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::uint64_t default_budget_ms() {
    if (const char* s = std::getenv("SPARSICODE_BUDGET_MS")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::uint64_t>(v);
    }
    return 60000;
}

// Node counter plus wall-clock deadline. tick() is cheap: the clock is only
// consulted every 4096 nodes.
class Budget {
public:
    explicit Budget(std::uint64_t max_nodes = 200'000'000,
                    std::uint64_t ms = default_budget_ms())
        : max_nodes_(max_nodes),
          deadline_(std::chrono::steady_clock::now() + std::chrono::milliseconds(ms)) {}

    void tick(const char* what) {
        ++nodes_;
        if (nodes_ > max_nodes_)
            throw budget_error(std::string(what) + ": node budget exhausted after " +
                               std::to_string(nodes_ - 1) + " nodes");
        if ((nodes_ & 0xfffu) == 0 && std::chrono::steady_clock::now() > deadline_)
            throw budget_error(std::string(what) + ": time budget exhausted after " +
                               std::to_string(nodes_) + " nodes");
    }

    std::uint64_t nodes() const { return nodes_; }

private:
    std::uint64_t nodes_ = 0;
    std::uint64_t max_nodes_;
    std::chrono::steady_clock::time_point deadline_;
};

struct ExactSearchLimits {
    std::size_t coord_cap = 24;          // max distinct support coordinates searched
    std::uint64_t node_budget = 200'000'000;
};

} // namespace sparsicode
