#pragma once

#include <stdexcept>
#include <string>

namespace smmlink {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside its documented range.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ParseError : public Error {
public:
    ParseError(int line, std::string key, const std::string& message)
        : Error("line " + std::to_string(line) + (key.empty() ? "" : " (" + key + ")") + ": " +
                message),
          line_(line), key_(std::move(key)) {}
    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

/// The beam misses the aperture: collected power below 1e-12.
class DegenerateAperture : public Error {
public:
    using Error::Error;
};

/// Smallest pivot of the estimated channel is below 1e-12 of the largest.
class SingularChannel : public Error {
public:
    using Error::Error;
};

/// The ZFBF power-accounting denominator is not positive.
class NegativeBudgetDenominator : public Error {
public:
    using Error::Error;
};

/// More than the tolerated share of ensemble realizations was singular.
class FractionSingular : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace smmlink
