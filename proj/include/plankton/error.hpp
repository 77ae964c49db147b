#pragma once

#include <stdexcept>
#include <string>

namespace plankton {

enum class ErrorCode {
    EmptyCorpus,
    UnreadableImage,
    BadRatios,
    NoForeground,
    ShapeMismatch,
    TooFewSamples,
    NotFitted,
    EmptySplit,
    EmptyVal,
    GradCheckFailed,
    MisalignedMembers,
    DegenerateLabels,
    EvalOnFitSplit,
    MisalignedIds,
    EmptyEvaluation,
    UnknownLabel,
    BadConfig,
    IoFailure,
};

const char* error_code_name(ErrorCode code);

// Single exception type; tests and the CLI dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::UnreadableImage: return "UnreadableImage";
        case ErrorCode::BadRatios: return "BadRatios";
        case ErrorCode::NoForeground: return "NoForeground";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::NotFitted: return "NotFitted";
        case ErrorCode::EmptySplit: return "EmptySplit";
        case ErrorCode::EmptyVal: return "EmptyVal";
        case ErrorCode::GradCheckFailed: return "GradCheckFailed";
        case ErrorCode::MisalignedMembers: return "MisalignedMembers";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::EvalOnFitSplit: return "EvalOnFitSplit";
        case ErrorCode::MisalignedIds: return "MisalignedIds";
        case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

}  // namespace plankton
