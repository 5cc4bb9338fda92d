#pragma once

#include "cgw/conditioned.hpp"
#include "cgw/convolution.hpp"
#include "cgw/harness.hpp"
#include "cgw/lamperti.hpp"
#include "cgw/limit.hpp"
#include "cgw/offspring.hpp"
#include "cgw/path.hpp"
#include "cgw/rng.hpp"
#include "cgw/spine.hpp"
#include "cgw/stats.hpp"
#include "cgw/step_function.hpp"
#include "cgw/tree.hpp"
#include "cgw/zeta.hpp"
