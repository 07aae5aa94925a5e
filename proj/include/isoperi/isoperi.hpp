#pragma once

#include "isoperi/calibration.hpp"
#include "isoperi/curves.hpp"
#include "isoperi/errors.hpp"
#include "isoperi/forms.hpp"
#include "isoperi/functionals.hpp"
#include "isoperi/io.hpp"
#include "isoperi/optimizer.hpp"
#include "isoperi/random.hpp"
#include "isoperi/stability.hpp"
