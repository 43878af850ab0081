# -*- coding: utf-8 -*-

import contextlib
import sys
import time


@contextlib.contextmanager
def timer():
    """
    Measures the wall time of a block::

        with timer() as elapsed:
            greedy_place(instance, sets)
        elapsed()  # seconds spent inside the block
    """
    started = time.time()
    finished = []
    yield lambda: (finished[0] if finished else time.time()) - started
    finished.append(time.time())


# adapted from https://gist.github.com/aubricus/f91fb55dc6ba5557fbab06119420dd6a
def print_progress(iteration, total, prefix='', suffix='', decimals=1, bar_length=50, stream=None):
    """
    A helper function to be called in a loop to create terminal progress bar, for example over the rows of a bench
    run. Writes to stderr by default so that reports on stdout stay machine readable.

    :param int iteration: current iteration
    :param int total: total iterations
    :param str prefix: prefix string, '' by default
    :param str suffix: suffix string
    :param int decimals: positive number of decimals in percent complete
    :param int bar_length: character length of bar
    :param stream: file object to write to
    """
    stream = sys.stderr if stream is None else stream
    total = max(total, 1)
    str_format = "{0:." + str(decimals) + "f}"
    percents = str_format.format(100 * (iteration / float(total)))
    filled_length = int(round(bar_length * iteration / float(total)))
    bar = '█' * filled_length + '-' * (bar_length - filled_length)

    stream.write('\r%s |%s| %s%s %s' % (prefix, bar, percents, '%', suffix))

    if iteration >= total:
        stream.write('\n')
    stream.flush()
