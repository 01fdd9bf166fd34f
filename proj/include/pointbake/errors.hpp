#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pointbake {

// Coarse classification used by the CLI to choose an exit code.
enum class ErrorCategory { Data, Config };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define POINTBAKE_DEFINE_ERROR(Name, Category)                 \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& what)                     \
        : Error(ErrorCategory::Category, #Name ": " + what) {} \
  };

POINTBAKE_DEFINE_ERROR(DegenerateTriangle, Data)
POINTBAKE_DEFINE_ERROR(TruncatedFile, Data)
POINTBAKE_DEFINE_ERROR(UnsupportedFormat, Data)
POINTBAKE_DEFINE_ERROR(IndexError, Data)
POINTBAKE_DEFINE_ERROR(DimensionError, Data)
POINTBAKE_DEFINE_ERROR(MissingUVs, Data)
POINTBAKE_DEFINE_ERROR(IoError, Data)
POINTBAKE_DEFINE_ERROR(ConfigError, Config)
POINTBAKE_DEFINE_ERROR(ManifestError, Config)

#undef POINTBAKE_DEFINE_ERROR

// A required PLY property is absent; property() names it.
class SchemaError : public Error {
 public:
  explicit SchemaError(std::string property)
      : Error(ErrorCategory::Data, "SchemaError: missing property '" + property + "'"),
        property_(std::move(property)) {}
  const std::string& property() const noexcept { return property_; }

 private:
  std::string property_;
};

class NonTriangleFace : public Error {
 public:
  NonTriangleFace(std::size_t line, std::size_t corners)
      : Error(ErrorCategory::Data, "NonTriangleFace: face with " + std::to_string(corners) +
                                       " corners at line " + std::to_string(line)),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class AtlasOverflow : public Error {
 public:
  AtlasOverflow(int requested, int minimum)
      : Error(ErrorCategory::Config,
              "AtlasOverflow: faces do not fit at resolution " + std::to_string(requested) +
                  "; minimum feasible resolution is " + std::to_string(minimum)),
        minimum_resolution_(minimum) {}
  int minimum_resolution() const noexcept { return minimum_resolution_; }

 private:
  int minimum_resolution_;
};

}  // namespace pointbake
