#ifndef BCP_BCP_HPP
#define BCP_BCP_HPP

#include "bcp/asymptotics.hpp"
#include "bcp/builtins.hpp"
#include "bcp/cache.hpp"
#include "bcp/core.hpp"
#include "bcp/ellipticity.hpp"
#include "bcp/fundamental.hpp"
#include "bcp/io.hpp"
#include "bcp/problem.hpp"
#include "bcp/resolvent.hpp"
#include "bcp/secular.hpp"
#include "bcp/spectrum.hpp"

#endif  // BCP_BCP_HPP
