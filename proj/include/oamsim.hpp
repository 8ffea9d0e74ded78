#pragma once

#include "oamsim/common.hpp"
#include "oamsim/angular.hpp"
#include "oamsim/plates.hpp"
#include "oamsim/overlap.hpp"
#include "oamsim/twophoton.hpp"
#include "oamsim/bell.hpp"
#include "oamsim/lg.hpp"
#include "oamsim/farfield.hpp"
#include "oamsim/oracle.hpp"
