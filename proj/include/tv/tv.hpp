#pragma once

#include "tv/errors.hpp"
#include "tv/core.hpp"
#include "tv/metrics.hpp"
#include "tv/models.hpp"
#include "tv/floquet.hpp"
#include "tv/levitation.hpp"
#include "tv/ordered_integral.hpp"
#include "tv/pulsed.hpp"
#include "tv/optimizer.hpp"
