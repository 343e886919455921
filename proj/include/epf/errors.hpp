#pragma once

#include <stdexcept>
#include <string>

namespace epf {

// Error taxonomy shared by all modules. Everything derives from Error so
// callers can catch the whole family at the CLI boundary.
class Error : public std::runtime_error {
public:
	explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class OutOfRange : public Error {
public:
	using Error::Error;
};

class AlignmentError : public Error {
public:
	using Error::Error;
};

class EmptyCell : public Error {
public:
	using Error::Error;
};

class DimensionMismatch : public Error {
public:
	using Error::Error;
};

class ModelError : public Error {
public:
	using Error::Error;
};

class UnknownLabel : public Error {
public:
	using Error::Error;
};

class NumericalFailure : public Error {
public:
	using Error::Error;
};

class SolveFailed : public Error {
public:
	using Error::Error;
};

class MissingSubModel : public Error {
public:
	using Error::Error;
};

class TooFewDays : public Error {
public:
	using Error::Error;
};

class SchemaError : public Error {
public:
	using Error::Error;
};

class CoverageError : public Error {
public:
	using Error::Error;
};

class ConfigError : public Error {
public:
	using Error::Error;
};

} // namespace epf
