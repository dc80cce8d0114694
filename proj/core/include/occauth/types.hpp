#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace occauth {

// Error taxonomy shared by all modules. Every failure named in an operation
// contract maps onto one of these so callers can react per category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class DegenerateDataError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class IncompleteFusionError : public Error {
public:
    using Error::Error;
};

class InvalidScoreError : public Error {
public:
    using Error::Error;
};

// Seed for every randomized operation. Same seed + same inputs must give
// bit-identical results; all generators are derived from this value.
struct RngSeed {
    std::uint64_t value = 0;

    friend bool operator==(RngSeed, RngSeed) = default;
};

// One fixed-length sample: the unit of classification. Values must be finite;
// the dimensionality is constant within a dataset.
struct FeatureVector {
    std::vector<double> values;

    FeatureVector() = default;

    explicit FeatureVector(std::vector<double> v) : values(std::move(v)) {
        for (double x : values) {
            if (!std::isfinite(x)) {
                throw InvalidArgumentError("FeatureVector: non-finite value");
            }
        }
    }

    int dim() const noexcept { return static_cast<int>(values.size()); }

    double operator[](std::size_t i) const noexcept { return values[i]; }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Unified score convention: higher means more genuine. Raw scores are only
// comparable across models after normalization (see fusion).
struct GenuinenessScore {
    double value = 0.0;

    friend bool operator==(GenuinenessScore, GenuinenessScore) = default;
};

enum class Decision { accept, reject };

// Total order on finite scores; throws InvalidScoreError on NaN/infinity.
std::strong_ordering compare_scores(GenuinenessScore a, GenuinenessScore b);

// One enrolled user's data. Training and test samples come from disjoint
// sessions; test_impostor is filled by the evaluation protocol, never at
// enrollment time.
struct UserDataset {
    std::string user_id;
    std::vector<FeatureVector> train_genuine;
    std::vector<FeatureVector> test_genuine;
    std::vector<FeatureVector> test_impostor;
};

}  // namespace occauth
