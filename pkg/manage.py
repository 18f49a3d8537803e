#!/usr/bin/env python3
from slicemux.ops import manage


if __name__ == '__main__':
    manage()
