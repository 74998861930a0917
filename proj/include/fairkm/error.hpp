#pragma once

#include <stdexcept>
#include <string>

namespace fairkm {

enum class ErrorCode {
    UnassignedClient,
    UnknownFacility,
    EmptyInput,
    DegenerateSet,
    EmptyCenters,
    AspectRatioTooLarge,
    SameBlock,
    UnknownLeaf,
    InconsistentConfigs,
    NoPerfectMatching,
    SupplyMismatch,
    NonIntegralFlow,
    Infeasible,
    BudgetExceeded,
    StateBudgetExceeded,
    CorruptTable,
    InvalidParams,
    ParseError,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace fairkm
