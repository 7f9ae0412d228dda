#pragma once

#include <stdexcept>
#include <string>

namespace qaplan {

/// Parse error with 1-based source location.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " at line " + std::to_string(line) +
                             ", column " + std::to_string(column)),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DanglingReference : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownGoal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SafetyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownBuiltin : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BuiltinDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UndeclaredType : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UndeclaredPredicate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArityMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownConcept : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConflictingValue : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TranslationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FixtureMiss : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingAnswer : public std::runtime_error {
public:
    MissingAnswer(const std::string& msg, int step)
        : std::runtime_error(msg), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

}  // namespace qaplan
