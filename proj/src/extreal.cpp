#include "branchlab/extreal.hpp"

#include "branchlab/error.hpp"

#include <cmath>
#include <cstdio>

namespace branchlab {

double ExtReal::value() const
{
    if (neg_inf_)
        throw Error(Errc::DomainError, "value() on the -inf sentinel");
    return value_;
}

std::string ExtReal::str() const
{
    return neg_inf_ ? std::string("-inf") : format_double(value_);
}

ExtReal log_add(ExtReal a, ExtReal b)
{
    if (a.is_neg_inf())
        return b;
    if (b.is_neg_inf())
        return a;
    double x = a.value(), y = b.value();
    if (x < y)
        std::swap(x, y);
    return ExtReal(x + std::log1p(std::exp(y - x)));
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
    return buf;
}

}  // namespace branchlab
