#include "spheresync/errors.hpp"

namespace spheresync {

ValidationError::ValidationError(const std::string& what) : std::invalid_argument(what) {}

NumericalError::NumericalError(const std::string& what) : std::runtime_error(what) {}

IoError::IoError(const std::string& path, const std::string& what)
    : std::runtime_error(path + ": " + what), path_(path) {}

}  // namespace spheresync
