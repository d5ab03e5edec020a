#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pwcsbf {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define PWCSBF_ERROR_TYPE(Name)                                          \
    struct Name : Error {                                                \
        explicit Name(const std::string& what) : Error(what) {}          \
    };

// geometry
PWCSBF_ERROR_TYPE(DimensionMismatch)
PWCSBF_ERROR_TYPE(InvertedBounds)
PWCSBF_ERROR_TYPE(NonPositiveEpsilon)
PWCSBF_ERROR_TYPE(InitialOutsideSpace)
PWCSBF_ERROR_TYPE(InitialUnsafeOverlap)
PWCSBF_ERROR_TYPE(IndexOutOfRange)

// dynamics / transition bounds
PWCSBF_ERROR_TYPE(InvertedInterval)
PWCSBF_ERROR_TYPE(NonPositiveSigma)
PWCSBF_ERROR_TYPE(DimensionTooLarge)

// linear programming
PWCSBF_ERROR_TYPE(LpInfeasible)
PWCSBF_ERROR_TYPE(LpSolverFailure)

// certificate
PWCSBF_ERROR_TYPE(LengthMismatch)
PWCSBF_ERROR_TYPE(NegativeBarrierValue)
PWCSBF_ERROR_TYPE(NegativeInput)

// io
PWCSBF_ERROR_TYPE(ParseError)
PWCSBF_ERROR_TYPE(SchemaViolation)
PWCSBF_ERROR_TYPE(FileNotFound)
PWCSBF_ERROR_TYPE(VersionMismatch)
PWCSBF_ERROR_TYPE(ChecksumMismatch)

#undef PWCSBF_ERROR_TYPE

// Row of an interval transition matrix cannot hold any probability vector.
// `row` is the offending row index, or npos for a standalone row.
struct InfeasibleRow : Error {
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t row;
    InfeasibleRow(std::size_t row, const std::string& what) : Error(what), row(row) {}
    explicit InfeasibleRow(const std::string& what) : Error(what), row(npos) {}
};

// A PWA inclusion whose lower map exceeds its upper map somewhere in a region.
struct InconsistentBounds : Error {
    std::size_t region;
    InconsistentBounds(std::size_t region, const std::string& what)
        : Error(what), region(region) {}
};

}  // namespace pwcsbf
