#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace ertbp {

enum class ErrorKind {
    domain,
    accuracy,
    singularity,
    contour,
    integration,
    range,
    critical_point,
    degenerate_amplitude,
    stall,
    tail_fit,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};

// Carries the achieved error estimate so callers can decide whether it is usable.
struct AccuracyError : Error {
    AccuracyError(const std::string& w, double estimate)
        : Error(ErrorKind::accuracy, w + " (estimate " + format(estimate) + ")"),
          estimate(estimate) {}
    double estimate;

private:
    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return buf;
    }
};

struct SingularityError : Error {
    explicit SingularityError(const std::string& w) : Error(ErrorKind::singularity, w) {}
};

struct ContourError : Error {
    ContourError(const std::string& w, double u) : Error(ErrorKind::contour, w), u(u) {}
    double u;
};

struct RangeError : Error {
    explicit RangeError(const std::string& w) : Error(ErrorKind::range, w) {}
};

struct CriticalPointError : Error {
    explicit CriticalPointError(const std::string& w) : Error(ErrorKind::critical_point, w) {}
};

struct DegenerateAmplitudeError : Error {
    explicit DegenerateAmplitudeError(const std::string& w)
        : Error(ErrorKind::degenerate_amplitude, w) {}
};

// Reports the point where no admissible progress was found.
struct StallError : Error {
    StallError(const std::string& w, double alpha, double G) : Error(ErrorKind::stall, w), alpha(alpha), G(G) {}
    double alpha, G;
};

struct TailFitError : Error {
    explicit TailFitError(const std::string& w) : Error(ErrorKind::tail_fit, w) {}
};

struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

}  // namespace ertbp
