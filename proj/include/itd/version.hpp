#pragma once

#define ITD_VERSION "0.1.0"
