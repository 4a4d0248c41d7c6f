namespace bosonic {}
