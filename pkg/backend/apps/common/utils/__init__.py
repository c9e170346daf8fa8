# Common utilities