#pragma once

#include <stdexcept>
#include <string>

namespace parksun {

// Every failure raised by the library derives from Error so callers can
// catch one type; the subclasses name the failure category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error { public: using Error::Error; };
class ArgumentError : public Error { public: using Error::Error; };
class EmptyRasterError : public Error { public: using Error::Error; };
class ExtentError : public Error { public: using Error::Error; };
class IndexError : public Error { public: using Error::Error; };
class GeometryError : public Error { public: using Error::Error; };
class RangeError : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class CapabilityError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

// Wraps a failure with the name of the pipeline stage it happened in.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace parksun
