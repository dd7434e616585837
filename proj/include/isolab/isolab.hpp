#pragma once

#include "isolab/errors.hpp"
#include "isolab/measure1d.hpp"
#include "isolab/needles.hpp"
#include "isolab/numerics.hpp"
#include "isolab/parallel.hpp"
#include "isolab/rates.hpp"
#include "isolab/report.hpp"
#include "isolab/stability.hpp"
