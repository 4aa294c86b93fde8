#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace orgdyn {

enum class ErrorCode {
  NonPositiveHeadcount,
  NonPositiveAttrition,
  AttritionNotDominatingGrowth,
  NegativeEligibilityAge,
  TemporaryWageNotAtPremium,
  EmptyOrganization,
  InvalidPlan,
  IndexOutOfRange,
  IllPosed,
  GrowthExceedsAttrition,
  MissingWage,
  MissingFloaterCurve,
  MassMismatch,
  CflViolation,
  InvalidGrid,
  InfeasibleInitialData,
  NoFeasibleCandidate,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ValidationIssue {
  ErrorCode code;
  int level;  // 0-based level index, -1 when the issue is organisation-wide
  std::string message;
};

/// Raised by validate(); carries every violated invariant, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);

  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// The steady-state promotable pool of `level` is not strictly positive.
class IllPosedError : public Error {
 public:
  IllPosedError(int level, double promotable);

  int level() const noexcept { return level_; }
  double promotable() const noexcept { return promotable_; }

 private:
  int level_;
  double promotable_;
};

}  // namespace orgdyn
