#ifndef TRACEMEASURE_ERRORS_HPP
#define TRACEMEASURE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tracemeasure {

/// Malformed input: parse failures, unknown object ids, invalid boxes.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact computation would exceed a configured enumeration cap.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourcePos {
  int line = 0;
  int column = 0;

  std::string str() const { return std::to_string(line) + ":" + std::to_string(column); }
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, SourcePos pos)
      : InputError(pos.str() + ": " + what), pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

/// Ill-typed term. Carries the typing rule that failed and where.
class TypeError : public InputError {
 public:
  enum class Kind { IncoherentLabels, NotAnArrow, NotAConj, NotAForall, EscapingTypeVariable, SumTypeMismatch, Unsupported };

  TypeError(Kind kind, std::string rule, SourcePos pos, const std::string& what)
      : InputError(kind_name(kind) + " (" + rule + ") at " + pos.str() + ": " + what),
        kind_(kind),
        rule_(std::move(rule)),
        pos_(pos) {}

  Kind kind() const { return kind_; }
  const std::string& rule() const { return rule_; }
  SourcePos pos() const { return pos_; }

  static std::string kind_name(Kind k) {
    switch (k) {
      case Kind::IncoherentLabels: return "IncoherentLabels";
      case Kind::NotAnArrow: return "NotAnArrow";
      case Kind::NotAConj: return "NotAConj";
      case Kind::NotAForall: return "NotAForall";
      case Kind::EscapingTypeVariable: return "EscapingTypeVariable";
      case Kind::SumTypeMismatch: return "SumTypeMismatch";
      case Kind::Unsupported: return "Unsupported";
    }
    return {};
  }

 private:
  Kind kind_;
  std::string rule_;
  SourcePos pos_;
};

/// A term outside the domain of a translation.
class UntranslatableError : public std::runtime_error {
 public:
  enum class Reason { ProjectorNormalForm, ProjectorNotReady };

  UntranslatableError(Reason reason, const std::string& what)
      : std::runtime_error(std::string(reason_name(reason)) + ": " + what), reason_(reason) {}

  Reason reason() const { return reason_; }

  static const char* reason_name(Reason r) {
    return r == Reason::ProjectorNormalForm ? "ProjectorNormalForm" : "ProjectorNotReady";
  }

 private:
  Reason reason_;
};

}  // namespace tracemeasure

#endif
