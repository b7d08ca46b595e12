#include "lexstab/error.hpp"

namespace lexstab {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : Error(ErrorKind::parse, message + " at offset " + std::to_string(offset)),
      message_(message),
      offset_(offset) {}

DataError::DataError(const std::string& message, std::size_t line)
    : Error(ErrorKind::data, line ? message + " at line " + std::to_string(line) : message),
      message_(message),
      line_(line) {}

}  // namespace lexstab
