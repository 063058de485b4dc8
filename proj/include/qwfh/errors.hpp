#pragma once

#include <stdexcept>
#include <string>

namespace qwfh {

// Every failure raised by the library derives from Error, so callers can
// catch the family or a single kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define QWFH_DEFINE_ERROR(Name)                 \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

QWFH_DEFINE_ERROR(CutoffExceeded);
QWFH_DEFINE_ERROR(InvalidWeights);
QWFH_DEFINE_ERROR(InvalidSqueezing);
QWFH_DEFINE_ERROR(InvalidEfficiency);
QWFH_DEFINE_ERROR(InvalidArgument);
QWFH_DEFINE_ERROR(DimensionMismatch);
QWFH_DEFINE_ERROR(IllConditioned);
QWFH_DEFINE_ERROR(Undefined);
QWFH_DEFINE_ERROR(WrongLayer);
QWFH_DEFINE_ERROR(MemoryBudgetExceeded);
QWFH_DEFINE_ERROR(ConfigError);
QWFH_DEFINE_ERROR(IoError);

#undef QWFH_DEFINE_ERROR

} // namespace qwfh
