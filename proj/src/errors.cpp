#include "hhm/errors.hpp"

namespace hhm {

void throw_invalid(const std::string& what) { throw InvalidArgument(what); }
void throw_guard(const std::string& what) { throw GuardError(what); }
void throw_numeric(const std::string& what) { throw NumericError(what); }

}  // namespace hhm
