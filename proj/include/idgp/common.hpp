#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace idgp {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input file could not be parsed; carries line/field context in the message.
struct ParseError : Error {
    int line = 0;
    ParseError(const std::string& msg, int line_no = 0)
        : Error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// Anchor points of a partial reflection are affinely dependent.
struct DegenerateAnchorError : Error {
    int vertex = 0;
    DegenerateAnchorError(const std::string& msg, int v) : Error(msg), vertex(v) {}
};

/// Pruning group is too large to enumerate (2^|Z| elements).
struct GroupTooLargeError : Error {
    int z_size = 0;
    GroupTooLargeError(const std::string& msg, int zs) : Error(msg), z_size(zs) {}
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Derives an independent RNG seed for a (base seed, stream index) pair.
/// Parallel and serial schedules that consume the same streams agree.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return detail::splitmix64(detail::splitmix64(base) ^ detail::splitmix64(stream + 1));
}

/// Deterministic work accounting for solver budgets and reports.
///
/// Wall-clock time is not reproducible across runs, so solvers meter their
/// work in per-edge merit term evaluations and convert at a fixed nominal
/// rate. Reports based on this clock are byte-identical for identical seeds.
class WorkMeter {
  public:
    static constexpr double kTermsPerSecond = 2.5e7;

    void charge(std::uint64_t terms) { terms_ += terms; }
    std::uint64_t terms() const { return terms_; }
    double seconds() const { return static_cast<double>(terms_) / kTermsPerSecond; }

  private:
    std::uint64_t terms_ = 0;
};

} // namespace idgp
