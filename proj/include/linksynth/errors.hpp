#ifndef LINKSYNTH_ERRORS_HPP
#define LINKSYNTH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace linksynth {

// Error kinds surfaced by the library. Tests match on the kind, the CLI maps
// them onto exit codes.
enum class Errc {
  Io,                    // unreadable/unwritable file
  Parse,                 // malformed CSV/JSON/DSL input
  DuplicatePrimaryKey,
  DanglingForeignKey,
  NullCell,              // null outside FK / R2-origin view cells
  ColumnCollision,       // join would duplicate a column name
  UnknownColumn,
  TypeMismatch,
  ForbiddenFKReference,  // DC body mentions the FK column
  ContradictoryCC,       // equal predicates, different targets (or empty range)
  ArityError,            // DC arity < 2 or body var out of range
  CapacityExceeded,      // benchgen cannot reach requested ccCount
  InstanceTooLarge,      // oracle guard tripped
  JoinMismatch,          // completed relations do not reproduce the view
  Internal
};

inline const char* errcName(Errc c) {
  switch (c) {
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
    case Errc::DuplicatePrimaryKey: return "DuplicatePrimaryKey";
    case Errc::DanglingForeignKey: return "DanglingForeignKey";
    case Errc::NullCell: return "NullCell";
    case Errc::ColumnCollision: return "ColumnCollision";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::ForbiddenFKReference: return "ForbiddenFKReference";
    case Errc::ContradictoryCC: return "ContradictoryCC";
    case Errc::ArityError: return "ArityError";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::InstanceTooLarge: return "InstanceTooLarge";
    case Errc::JoinMismatch: return "JoinMismatch";
    case Errc::Internal: return "Internal";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errcName(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) { throw Error(c, msg); }

}  // namespace linksynth

#endif
