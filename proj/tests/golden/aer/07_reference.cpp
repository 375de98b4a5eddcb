void inc(int &v) { v += 1; }
