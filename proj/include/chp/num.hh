// Exact arithmetic: arbitrary-precision rationals and integers.  No floating
// point anywhere in the kernel.

#ifndef CHP_NUM_HH
#define CHP_NUM_HH

#include <gmpxx.h>

#include <string>

namespace chp {

using Rat = mpq_class;
using Int = mpz_class;

inline std::string rat_text(const Rat& q) {
    Rat c = q;
    c.canonicalize();
    return c.get_str();
}

inline std::string int_text(const Int& n) { return n.get_str(); }

}  // namespace chp

#endif
