#pragma once

#include <stdexcept>
#include <string>

namespace apet {

// Base of every exception thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The caller asked for something impossible: bad budgets, mismatched
// shapes, contradictory options. Maps to CLI exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

// Input data is malformed or unusable: broken files, non-finite values,
// empty matrices. Maps to CLI exit code 3.
class DataError : public Error {
public:
    using Error::Error;
};

// A numerical operation failed beyond recovery. Maps to CLI exit code 4.
class NumericError : public Error {
public:
    using Error::Error;
};

// --- usage errors ---

class InvalidBudget : public UsageError {
public:
    using UsageError::UsageError;
};

class DimensionMismatch : public UsageError {
public:
    using UsageError::UsageError;
};

// --- data errors ---

class BadMagic : public DataError {
public:
    using DataError::DataError;
};

class UnsupportedVersion : public DataError {
public:
    using DataError::DataError;
};

class TruncatedPayload : public DataError {
public:
    using DataError::DataError;
};

// File holds more bytes than the header promises.
class TrailingBytes : public DataError {
public:
    using DataError::DataError;
};

class RaggedCsv : public DataError {
public:
    using DataError::DataError;
};

class NonFiniteValue : public DataError {
public:
    using DataError::DataError;
};

// Matrices must have at least one row and one column.
class EmptyMatrix : public DataError {
public:
    using DataError::DataError;
};

// Relative measures are undefined on an all-zero matrix.
class ZeroMatrix : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

// --- numeric errors ---

// Gram matrix could not be factorized even after jitter escalation.
class SingularGram : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace apet
