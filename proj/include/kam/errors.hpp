#ifndef KAM_ERRORS_HPP
#define KAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kam {

// Base of all library errors; code() is a stable machine-readable tag.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string &what) : std::runtime_error(what), code_(std::move(code)) {}
    const std::string &code() const noexcept { return code_; }

private:
    std::string code_;
};

#define KAM_DEFINE_ERROR(Name, tag)                                                                \
    class Name : public Error {                                                                    \
    public:                                                                                        \
        explicit Name(const std::string &what) : Error(tag, what) {}                               \
    };

KAM_DEFINE_ERROR(InvalidArgument, "invalid_argument")
KAM_DEFINE_ERROR(DimensionError, "dimension_error")
KAM_DEFINE_ERROR(BudgetExceeded, "budget_exceeded")
KAM_DEFINE_ERROR(ShapeMismatch, "shape_mismatch")
KAM_DEFINE_ERROR(OrderViolation, "order_violation")
KAM_DEFINE_ERROR(OrderTooLow, "order_too_low")
KAM_DEFINE_ERROR(NonInvertible, "noninvertible_linear_part")
KAM_DEFINE_ERROR(SmallDivisor, "small_divisor")
KAM_DEFINE_ERROR(ResonanceError, "resonance")
KAM_DEFINE_ERROR(NonElliptic, "non_elliptic")
KAM_DEFINE_ERROR(CertificateFailure, "certificate_failure")
KAM_DEFINE_ERROR(StageError, "non_increasing_order")
KAM_DEFINE_ERROR(ParseError, "parse_error")

#undef KAM_DEFINE_ERROR

} // namespace kam

#endif
