#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nogear {

/// Count-valued state of the process (non-negative in every valid series).
using count_t = std::int64_t;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter inequality failed; the message names the inequality.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

class TruncationTooSevere : public Error {
public:
    using Error::Error;
};

class OriginOutOfRange : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateSeries : public Error {
public:
    using Error::Error;
};

class AiccUndefined : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Series and RNG plumbing
// ---------------------------------------------------------------------------

struct CountSeries {
    std::vector<count_t> values;
    std::string name;

    std::size_t size() const { return values.size(); }
    count_t operator[](std::size_t i) const { return values[i]; }

    count_t max_value() const {
        count_t m = 0;
        for (count_t v : values) m = std::max(m, v);
        return m;
    }

    void check_non_negative() const {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 0) {
                throw InputError("negative count at index " + std::to_string(i));
            }
        }
    }
};

/// Identical (seed, stream) pairs yield identical engines.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::mt19937_64 engine() const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
        return std::mt19937_64(seq);
    }

    RngSpec substream(std::uint64_t k) const {
        // splitmix64 finalizer keeps derived streams well separated
        std::uint64_t z = stream + 0x9e3779b97f4a7c15ull * (k + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return {seed, z ^ (z >> 31)};
    }
};

namespace detail {

inline double log_factorial(count_t n) {
    static const std::array<double, 1024> table = [] {
        std::array<double, 1024> t{};
        t[0] = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    if (n < static_cast<count_t>(table.size())) return table[static_cast<std::size_t>(n)];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

inline double log_choose(count_t n, count_t k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

inline std::size_t idx(count_t v) { return static_cast<std::size_t>(v); }

}  // namespace detail

}  // namespace nogear
