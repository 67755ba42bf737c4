#pragma once

#include <stdexcept>
#include <string>

namespace smcgen {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid run/experiment configuration (bad step size, missing observations, ...).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

// Invalid argument to a library operation (weight vector out of contract,
// leaf index out of range, size guard exceeded, ...).
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error("input: " + what) {}
};

// A computation produced a nonfinite value where a finite one is required.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error("numeric: " + what) {}
};

// Every potential in one generation evaluated to zero; carries the generation.
class DegenerateWeightsError : public Error {
public:
    DegenerateWeightsError(int generation, const std::string& what)
        : Error("degenerate weights at generation " + std::to_string(generation) + ": " + what),
          generation_(generation) {}
    int generation() const { return generation_; }

private:
    int generation_;
};

// A time-change query ran past the recorded horizon; carries the cumulative
// coalescence probability that was actually reached.
class HorizonExhaustedError : public Error {
public:
    HorizonExhaustedError(double achieved, double requested)
        : Error("horizon exhausted: cumulative pair-merger probability reached " +
                std::to_string(achieved) + " < requested " + std::to_string(requested)),
          achieved_(achieved),
          requested_(requested) {}
    double achieved() const { return achieved_; }
    double requested() const { return requested_; }

private:
    double achieved_;
    double requested_;
};

} // namespace smcgen
