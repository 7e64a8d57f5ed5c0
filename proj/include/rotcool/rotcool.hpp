#pragma once

#include "rotcool/errors.hpp"
#include "rotcool/params.hpp"
#include "rotcool/special_functions.hpp"
#include "rotcool/condensate.hpp"
#include "rotcool/rates_single.hpp"
#include "rotcool/rates_two.hpp"
#include "rotcool/kinetics.hpp"
#include "rotcool/cli.hpp"
