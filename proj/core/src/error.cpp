#include "orgdyn/error.hpp"

#include <sstream>

namespace orgdyn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveHeadcount: return "NonPositiveHeadcount";
    case ErrorCode::NonPositiveAttrition: return "NonPositiveAttrition";
    case ErrorCode::AttritionNotDominatingGrowth: return "AttritionNotDominatingGrowth";
    case ErrorCode::NegativeEligibilityAge: return "NegativeEligibilityAge";
    case ErrorCode::TemporaryWageNotAtPremium: return "TemporaryWageNotAtPremium";
    case ErrorCode::EmptyOrganization: return "EmptyOrganization";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::IllPosed: return "IllPosed";
    case ErrorCode::GrowthExceedsAttrition: return "GrowthExceedsAttrition";
    case ErrorCode::MissingWage: return "MissingWage";
    case ErrorCode::MissingFloaterCurve: return "MissingFloaterCurve";
    case ErrorCode::MassMismatch: return "MassMismatch";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InfeasibleInitialData: return "InfeasibleInitialData";
    case ErrorCode::NoFeasibleCandidate: return "NoFeasibleCandidate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << issues.size() << " validation issue(s)";
  for (const auto& issue : issues) {
    os << "; [" << to_string(issue.code);
    if (issue.level >= 0) os << " @ level " << issue.level + 1;
    os << "] " << issue.message;
  }
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error(issues.empty() ? ErrorCode::InvalidConfig : issues.front().code, join_issues(issues)),
      issues_(std::move(issues)) {}

IllPosedError::IllPosedError(int level, double promotable)
    : Error(ErrorCode::IllPosed,
            "steady promotable pool at level " + std::to_string(level + 1) +
                " is not positive (" + std::to_string(promotable) + ")"),
      level_(level),
      promotable_(promotable) {}

}  // namespace orgdyn
