#include "core/errors.hpp"

namespace celf {

void fail_invalid(const std::string& what) { throw InvalidArgument(what); }
void fail_dims(const std::string& what) { throw DimensionMismatch(what); }

}  // namespace celf
