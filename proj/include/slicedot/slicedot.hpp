#pragma once

#include "slicedot/error.hpp"
#include "slicedot/extensions.hpp"
#include "slicedot/fixtures.hpp"
#include "slicedot/io.hpp"
#include "slicedot/kernels.hpp"
#include "slicedot/kll.hpp"
#include "slicedot/measures.hpp"
#include "slicedot/one_d.hpp"
#include "slicedot/plans.hpp"
#include "slicedot/rng.hpp"
#include "slicedot/slicers.hpp"
#include "slicedot/spline.hpp"
#include "slicedot/sw.hpp"
#include "slicedot/variational.hpp"
