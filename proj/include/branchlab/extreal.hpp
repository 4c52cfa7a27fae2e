#pragma once

#include <string>

namespace branchlab {

// A real number or the -infinity sentinel. Also used for logs of
// nonnegative quantities, where the sentinel stands for log(0).
class ExtReal {
public:
    constexpr ExtReal() = default;
    constexpr explicit ExtReal(double v) : neg_inf_(false), value_(v) {}

    static constexpr ExtReal neg_inf() { return ExtReal(); }

    constexpr bool is_neg_inf() const { return neg_inf_; }
    double value() const;
    double value_or(double fallback) const { return neg_inf_ ? fallback : value_; }

    std::string str() const;

    friend bool operator==(const ExtReal& a, const ExtReal& b)
    {
        if (a.neg_inf_ || b.neg_inf_)
            return a.neg_inf_ == b.neg_inf_;
        return a.value_ == b.value_;
    }
    friend bool operator<(const ExtReal& a, const ExtReal& b)
    {
        if (b.neg_inf_)
            return false;
        if (a.neg_inf_)
            return true;
        return a.value_ < b.value_;
    }

private:
    bool neg_inf_ = true;
    double value_ = 0.0;
};

// log(e^a + e^b)
ExtReal log_add(ExtReal a, ExtReal b);

std::string format_double(double v);

}  // namespace branchlab
