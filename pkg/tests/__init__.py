# nslfa test suite
