#pragma once

#include "lyapsep/errors.hpp"
#include "lyapsep/expr.hpp"
#include "lyapsep/system.hpp"
#include "lyapsep/config.hpp"
#include "lyapsep/dopri.hpp"
#include "lyapsep/propagator.hpp"
#include "lyapsep/lyapunov.hpp"
#include "lyapsep/envelope.hpp"
#include "lyapsep/separation.hpp"
#include "lyapsep/dichotomy.hpp"
#include "lyapsep/spectrum.hpp"
#include "lyapsep/transform.hpp"
#include "lyapsep/perturb.hpp"
#include "lyapsep/report.hpp"
