#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mutqual {

enum class ErrorKind {
  // record validation
  EmptyField,
  BadModelKind,
  ConfigOnNonMutant,
  NonPositiveRunIndex,
  // parsing and grouping
  MalformedLine,
  UnknownField,
  DuplicateKey,
  MissingOriginalRun,
  TestSetMismatch,
  IncompleteGrid,
  LabelConflict,
  // analysis
  UnknownVariant,
  NoMutants,
  EmptyTestSet,
  // selection
  NoRuleMatch,
  AmbiguousRule,
  MalformedConfig,
  InvalidRuleSet,
  EmptyDataset,
  NoEqValues,
  EqUndefined,
  InvalidTau,
  InvalidCounts,
  EmptyHoldout,
  // synth / io
  InvalidSpec,
  IoFailure,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyField: return "EmptyField";
    case ErrorKind::BadModelKind: return "BadModelKind";
    case ErrorKind::ConfigOnNonMutant: return "ConfigOnNonMutant";
    case ErrorKind::NonPositiveRunIndex: return "NonPositiveRunIndex";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::UnknownField: return "UnknownField";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::MissingOriginalRun: return "MissingOriginalRun";
    case ErrorKind::TestSetMismatch: return "TestSetMismatch";
    case ErrorKind::IncompleteGrid: return "IncompleteGrid";
    case ErrorKind::LabelConflict: return "LabelConflict";
    case ErrorKind::UnknownVariant: return "UnknownVariant";
    case ErrorKind::NoMutants: return "NoMutants";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::NoRuleMatch: return "NoRuleMatch";
    case ErrorKind::AmbiguousRule: return "AmbiguousRule";
    case ErrorKind::MalformedConfig: return "MalformedConfig";
    case ErrorKind::InvalidRuleSet: return "InvalidRuleSet";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::NoEqValues: return "NoEqValues";
    case ErrorKind::EqUndefined: return "EqUndefined";
    case ErrorKind::InvalidTau: return "InvalidTau";
    case ErrorKind::InvalidCounts: return "InvalidCounts";
    case ErrorKind::EmptyHoldout: return "EmptyHoldout";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Domain error. `what()` renders as `Kind(detail)`.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string detail)
      : std::runtime_error(std::string(to_string(kind)) + "(" + detail + ")"),
        kind_(kind),
        detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same kind, detail prefixed with a location such as `line 12`.
  Error located(std::string_view where) const {
    return Error(kind_, std::string(where) + ": " + detail_);
  }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace mutqual
