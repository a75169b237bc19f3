"""Automatically generate the Python API documentation pages by parsing the public
functions and classes from `__all__`.
"""

import re
from pathlib import Path

import mkdocs_gen_files

PATHS_TO_PARSE = [
    'cookiesync/ids/detect.py',
    'cookiesync/sync/detect.py',
    'cookiesync/sync/decode.py',
    'cookiesync/graph/relation_graph.py',
    'cookiesync/graph/metrics.py',
    'cookiesync/graph/classify.py',
    'cookiesync/longitudinal.py',
    'cookiesync/sar.py',
    'cookiesync/synth.py',
    'cookiesync/plots/namespace.py',
]


def get_elements_from_all(file_path):
    """Parse a file to find all elements of the `__all__` attribute."""
    with Path.open(file_path) as f:
        contents = f.read()

        # capture list assigned to __all__ with a regular expression (the `[^\]]+` part
        # of the regex matches one or more characters that are not the closing bracket)
        all_regex = r'__all__ = \[([^\]]+)\]'
        match = re.search(all_regex, contents, re.DOTALL)  # re.DOTALL matches newlines
        if match:
            # extract first group from the match (the part inside the brackets)
            all_str = match.group(1)
            # remove all whitespaces, newlines and single or double quotes
            all_str = all_str.translate({ord(c): None for c in ' \'"\n'})
            # strip the trailing comma (for multiline __all__ definitions) and split
            return all_str.strip(',').split(',')
        else:
            return []


# generate a documentation file for each function or class of each file
for path in PATHS_TO_PARSE:
    # start with e.g. 'cookiesync/graph/metrics.py'
    src_path = Path(path)
    # convert to e.g 'python_api/graph/metrics'
    doc_path = Path('python_api', *src_path.parts[1:]).with_suffix('')
    # convert to e.g 'cookiesync.graph.metrics'
    identifier = src_path.with_suffix('').as_posix().replace('/', '.')

    for name in get_elements_from_all(src_path):
        # constants have no page
        if name.isupper():
            continue

        # convert to e.g 'python_api/graph/metrics/graph_stats.md'
        doc_path_function = Path(doc_path, name).with_suffix('.md')

        with mkdocs_gen_files.open(doc_path_function, 'w') as f:
            print(f'::: {identifier}.{name}', file=f)

        mkdocs_gen_files.set_edit_path(doc_path_function, Path('..') / src_path)
