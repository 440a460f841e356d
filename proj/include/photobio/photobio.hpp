#pragma once

#include "photobio/error.hpp"
#include "photobio/numeric.hpp"
#include "photobio/taxis.hpp"
#include "photobio/params.hpp"
#include "photobio/basic_state.hpp"
#include "photobio/stability.hpp"
#include "photobio/oracle.hpp"
#include "photobio/neutral.hpp"
#include "photobio/fields.hpp"
