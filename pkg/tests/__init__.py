# Test package for SegLoc Project
