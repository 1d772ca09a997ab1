// errors.hpp: Exception hierarchy shared by all srlab modules

#pragma once

#include <stdexcept>
#include <string>

namespace srlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mean-field solution requires Δ != 0
struct DegenerateDetuning : Error {
    DegenerateDetuning() : Error("mean-field analysis requires a nonzero detuning") {}
};

struct ZeroCoupling : Error {
    ZeroCoupling() : Error("mean-field branches require lambda > 0") {}
};

// |z| > 1/2: no real field amplitude on the spin shell
struct OffShell : Error {
    explicit OffShell(double z) : Error("z = " + std::to_string(z) + " lies off the spin shell"), z(z) {}
    double z;
};

struct EigenFailure : Error {
    using Error::Error;
};

struct UnstableDrift : Error {
    explicit UnstableDrift(double max_re)
        : Error("drift matrix is not Hurwitz on the noise-driven subspace (max Re = " +
                std::to_string(max_re) + ")"),
          max_real_part(max_re) {}
    double max_real_part;
};

struct BoundaryPole : Error {
    using Error::Error;
};

struct NonConvergence : Error {
    NonConvergence(const std::string& what, double residual) : Error(what), residual(residual) {}
    double residual;
};

struct StepRejected : Error {
    StepRejected(double t, double h)
        : Error("integrator step rejected at t = " + std::to_string(t) + " (h = " + std::to_string(h) + ")"),
          time(t), step(h) {}
    double time;
    double step;
};

struct CutoffTooSmall : Error {
    explicit CutoffTooSmall(double leak)
        : Error("Fock cutoff too small: truncation leak " + std::to_string(leak)), leak(leak) {}
    double leak;
};

struct ConfigError : Error {
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
    int line;
};

struct SchemaMismatch : Error {
    using Error::Error;
};

} // namespace srlab
