#pragma once

#include "spirokin/errors.hpp"
#include "spirokin/spiral.hpp"
#include "spirokin/manipulator.hpp"
#include "spirokin/statics.hpp"
#include "spirokin/actuation.hpp"
#include "spirokin/calibration.hpp"
#include "spirokin/validation.hpp"
#include "spirokin/io.hpp"
#include "spirokin/strategy.hpp"
