#pragma once

#include <stdexcept>
#include <string>

namespace aqt {

enum class ErrorCode {
	NoPath,
	InvalidTopology,
	InvalidPacket,
	InvalidEll,
	InvalidParams,
	OutOfRange,
	InfeasibleActivation,
	CapacityViolation,
	CheckerFailure,
	TooLarge,
	ParseError,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error
{
	public:

	Error(ErrorCode code, const std::string& what)
	: std::runtime_error(std::string(to_string(code)) + ": " + what)
	, code_(code)
	{
	}

	ErrorCode code() const { return code_; }

	private:

	ErrorCode code_;
};

inline const char* to_string(ErrorCode code)
{
	switch (code) {
	case ErrorCode::NoPath: return "NoPath";
	case ErrorCode::InvalidTopology: return "InvalidTopology";
	case ErrorCode::InvalidPacket: return "InvalidPacket";
	case ErrorCode::InvalidEll: return "InvalidEll";
	case ErrorCode::InvalidParams: return "InvalidParams";
	case ErrorCode::OutOfRange: return "OutOfRange";
	case ErrorCode::InfeasibleActivation: return "InfeasibleActivation";
	case ErrorCode::CapacityViolation: return "CapacityViolation";
	case ErrorCode::CheckerFailure: return "CheckerFailure";
	case ErrorCode::TooLarge: return "TooLarge";
	case ErrorCode::ParseError: return "ParseError";
	}
	return "Unknown";
}

} // namespace aqt
