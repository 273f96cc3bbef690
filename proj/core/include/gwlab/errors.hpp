#pragma once

#include <stdexcept>

namespace gwlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidShape : Error { using Error::Error; };
struct InvalidLabel : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };
struct InvalidTarget : Error { using Error::Error; };
struct InvalidCategory : Error { using Error::Error; };
struct InvalidBelief : Error { using Error::Error; };
struct InvalidScene : Error { using Error::Error; };
struct InvalidData : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IncompatibleCheckpoint : Error { using Error::Error; };
struct JoinError : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace gwlab
